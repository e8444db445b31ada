import math
import os
import pathlib
import random

import pytest

import quantcredit as qc

SOURCE = pathlib.Path(os.environ.get("QUANTCREDIT_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


def small_config():
    text = (SOURCE / "configs" / "bs.cfg").read_text()
    overrides = {
        "numerics.n": "5",
        "numerics.grid_size": "8",
        "numerics.lloyd_iters": "5",
        "numerics.quantizer_paths": "1000",
        "numerics.transition_paths": "1000",
        "numerics.mc_trials": "400",
        "scenario.maturities": "1.5, 4",
    }
    lines = []
    for line in text.splitlines():
        key = line.split("=")[0].strip()
        lines.append(f"{key} = {overrides.pop(key)}" if key in overrides else line)
    lines += [f"{k} = {v}" for k, v in overrides.items()]
    return qc.parse_config("\n".join(lines))


def test_closed_form_matches_bridge_mc():
    closed = qc.survival_gbm_closed(86.3, 76.0, 0.03, 0.05, 1.0)
    est = qc.survival_full_mc(86.3, 1.0, 2.0, 76.0, steps=50, trials=20000, seed=3)
    assert abs(est.value - closed) <= 3 * est.std_error + 1e-12
    assert 0.0 < closed < 1.0


def test_bridge_factor_and_spread():
    assert qc.bridge_survival_factor(75.0, 90.0, 76.0, 4.0, 0.1) == 0.0
    f = qc.bridge_survival_factor(80.0, 81.0, 76.0, 4.0, 0.1)
    assert f == pytest.approx(-math.expm1(-2 * 4 * 5 / (16 * 0.1)))
    assert qc.spread(1.0, 1.0, 2.0) == 0.0
    assert qc.spread(0.0, 1.0, 2.0) == math.inf


def test_correlation_decreases():
    values = [qc.correlation_bs(0.1 + 0.5 * i, 0.05, 0.1) for i in range(22)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_lloyd_gaussian_two_points():
    rng = random.Random(5)
    samples = [rng.gauss(0.0, 1.0) for _ in range(50000)]
    out = qc.lloyd(samples, 2, iters=30)
    target = math.sqrt(2 / math.pi)
    assert out["points"][0] == pytest.approx(-target, abs=0.03)
    assert out["points"][1] == pytest.approx(target, abs=0.03)
    d = out["distortion"]
    assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))


def test_invalid_config_lists_every_problem():
    with pytest.raises(qc.ValidationError) as err:
        qc.parse_config("firm.model = heston\nscenario.barrier = -1\n")
    assert "firm.model" in str(err.value)


def test_pipeline_round_trip(tmp_path):
    cfg = small_config()
    result = qc.run_pipeline(cfg, tmp_path, obs_index=2)
    weights = result["filter"]["weights"]
    assert abs(sum(weights) - 1.0) < 1e-10
    assert min(weights) >= 0.0
    surv = result["curve"]["survival"]
    assert surv == sorted(surv, reverse=True)
    for name in ("grid.txt", "observations.csv", "filter.csv", "spreads.csv", "manifest.json"):
        assert (tmp_path / name).exists()

    again = qc.run_pipeline(cfg, tmp_path / "again", obs_index=2)
    assert again["curve"]["spread"] == result["curve"]["spread"]
    assert (tmp_path / "spreads.csv").read_bytes() == (tmp_path / "again" / "spreads.csv").read_bytes()


def test_convergence_rows():
    cfg = small_config()
    rows = qc.run_convergence(cfg, "M=1000,4000")
    assert [r["value"] for r in rows] == [1000, 4000]
    assert rows[0]["stderr"] > rows[1]["stderr"]

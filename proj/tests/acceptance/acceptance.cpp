// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance            all criteria
//   acceptance 3 7        only the listed criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "frozen_constants.hpp"
#include "oracles.hpp"
#include "quantcredit/config.hpp"
#include "quantcredit/filtering.hpp"
#include "quantcredit/pipeline.hpp"
#include "quantcredit/quantization.hpp"
#include "quantcredit/random.hpp"
#include "quantcredit/spreads.hpp"
#include "quantcredit/survival.hpp"

using namespace quantcredit;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = QUANTCREDIT_SOURCE_DIR "/configs/";
constexpr std::size_t kDeskTrials = 10000;

using clock_type = std::chrono::steady_clock;
double since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Shared Black-Scholes run: paper-scale quantization, desk-scale Monte Carlo.
struct BsRun {
    ScenarioConfig cfg;
    GridCache cache;
    Observations obs;
    FilterDistribution filter;
    SpreadCurve curve;
    double curve_seconds = 0.0;
};

ScenarioConfig desk(const std::string& file) {
    auto cfg = load_config(kConfigs + file);
    cfg.numerics.mc_trials = kDeskTrials;
    return cfg;
}

const BsRun& bs_run() {
    static const BsRun run = [] {
        BsRun r;
        r.cfg = desk("bs.cfg");
        r.cache = build_quantization(r.cfg);
        r.obs = observe(r.cfg, ObservationSource::simulated(0));
        r.filter = run_filter(r.obs.prices, r.cache.sequence, r.cache.transitions, r.cfg.firm_model(),
                              r.cfg.observation, r.cfg.time_grid());
        const auto t0 = clock_type::now();
        const auto& num = r.cfg.numerics;
        r.curve = spread_curve(r.filter, r.cfg.firm_model(), r.cfg.scenario, num.euler_schedule, num.mc_trials,
                               r.cfg.seed, num.weight_floor, num.workers);
        r.curve_seconds = since(t0);
        return r;
    }();
    return run;
}

bool weights_valid(const FilterDistribution& f, double tol) {
    double total = 0.0;
    for (double w : f.weights) {
        if (!(w >= 0.0)) return false;
        total += w;
    }
    return std::abs(total - 1.0) <= tol;
}

// ---------------------------------------------------------------------------

Outcome gbm_oracle() {
    Outcome o;
    const auto fv = FirmValueModel::gbm(0.03, 0.05);
    const double closed = survival_gbm_closed(86.3, 76.0, 0.03, 0.05, 1.0);
    const auto t0 = clock_type::now();
    const auto e = survival_full_mc(fv, 86.3, 1.0, 2.0, 76.0, 50, 100000, 2024);
    const double secs = since(t0);
    o.require(std::abs(e.value - closed) <= 3.0 * e.std_error,
              fmt("bridge N=50 M=1e5 %.6f vs closed %.6f, |diff|=%.2e <= 3se=%.2e", e.value, closed,
                  std::abs(e.value - closed), 3.0 * e.std_error));
    o.require(std::abs(oracle::kBruteForceValue - closed) <= 3.0 * oracle::kBruteForceStdErr,
              fmt("frozen brute force (N=2000, M=1e6) %.6f, |diff|=%.2e <= 3se=%.2e", oracle::kBruteForceValue,
                  std::abs(oracle::kBruteForceValue - closed), 3.0 * oracle::kBruteForceStdErr));
    o.require(secs < 60.0, fmt("MC leg %.1fs < 60s", secs));
    return o;
}

Outcome bridge_beats_naive() {
    Outcome o;
    const auto fv = FirmValueModel::gbm(0.03, 0.05);
    const auto b = survival_full_mc(fv, 86.3, 1.0, 2.0, 76.0, 25, 100000, 2025);
    const auto n = survival_naive_mc(fv, 86.3, 1.0, 2.0, 76.0, 25, 100000, 2025);
    const double combined = std::sqrt(b.std_error * b.std_error + n.std_error * n.std_error);
    o.require(n.value - b.value > 3.0 * combined,
              fmt("N=25: naive %.6f - bridge %.6f = %.2e > 3 combined se %.2e", n.value, b.value, n.value - b.value,
                  3.0 * combined));
    return o;
}

Outcome filter_oracle() {
    Outcome o;
    auto cfg = load_config(kConfigs + "bs.cfg");
    cfg.numerics.n = 5;
    cfg.numerics.sizes = {1, 10, 10, 10, 10, 10};
    const auto fv = cfg.firm_model();
    const auto grid = cfg.time_grid();
    const auto cache = build_quantization(cfg);
    const auto obs = observe(cfg, ObservationSource::simulated(0));
    const auto f = run_filter(obs.prices, cache.sequence, cache.transitions, fv, cfg.observation, grid);

    const oracle::GbmObservationSetup setup{86.3, 0.03, 0.05, 0.03, 0.05, 0.1};
    const auto particles =
        oracle::bootstrap_particle_filter(setup, grid.instants(), obs.prices.values, 1000000, 777);
    const auto binned = oracle::bin_to_cells(particles, cache.sequence.grids.back().points);
    const double tv = oracle::total_variation(binned, f.weights);
    o.require(tv <= 0.05, fmt("TV to 1e6-particle filter %.4f <= 0.05", tv));

    std::vector<std::size_t> sizes;
    for (const auto& g : cache.sequence.grids) sizes.push_back(g.size());
    const auto exact = oracle::hmm_enumeration(
        sizes, [&](std::size_t k, std::size_t i, std::size_t j) { return cache.transitions[k](i, j); },
        [&](std::size_t k, std::size_t i, std::size_t j) {
            return likelihood(cache.sequence.grids[k].points[i], obs.prices.values[k],
                              cache.sequence.grids[k + 1].points[j], obs.prices.values[k + 1], fv, cfg.observation,
                              grid[k], grid.dt(k + 1));
        });
    double worst = 0.0;
    for (std::size_t j = 0; j < exact.size(); ++j) worst = std::max(worst, std::abs(exact[j] - f.weights[j]));
    o.require(worst <= 1e-10, fmt("exact HMM enumeration max |diff| %.1e <= 1e-10", worst));
    return o;
}

Outcome filter_invariants() {
    Outcome o;
    const auto& r = bs_run();
    const auto fv = r.cfg.firm_model();
    const auto grid = r.cfg.time_grid();
    bool all_valid = true, neutral = true;
    double worst_sum = 0.0;
    FilterDistribution prev;
    run_filter(r.obs.prices, r.cache.sequence, r.cache.transitions, fv, r.cfg.observation, grid,
               [&](const FilterDistribution& f) {
                   all_valid = all_valid && weights_valid(f, 1e-10);
                   double total = 0.0;
                   for (double w : f.weights) total += w;
                   worst_sum = std::max(worst_sum, std::abs(total - 1.0));
                   if (f.step > 0) {
                       // Constant likelihood: the step must reduce to prior propagation.
                       const auto& t = r.cache.transitions[f.step - 1];
                       std::vector<double> prior(t.cols, 0.0);
                       for (std::size_t i = 0; i < t.rows; ++i) {
                           if (prev.weights[i] <= 0.0) continue;
                           for (std::size_t j = 0; j < t.cols; ++j)
                               if (t(i, j) > 0.0) prior[j] += prev.weights[i] * t(i, j) * 1.0;
                       }
                       double s = 0.0;
                       for (double w : prior) s += w;
                       for (double& w : prior) w /= s;
                       const auto c = filter_step_with(prev, t, r.cache.sequence.grids[f.step].points,
                                                       [](std::size_t, std::size_t) { return 2.5; });
                       neutral = neutral && c.weights == prior && std::abs(c.log_evidence - prev.log_evidence - 2.5 - std::log(s)) <= 1e-12;
                   }
                   prev = f;
               });
    o.require(all_valid, fmt("n=50, N_k=60: weights >= 0 and |sum - 1| <= 1e-10 at every step (worst %.1e)", worst_sum));
    o.require(neutral, "constant likelihood reproduces prior propagation bit for bit at every step");
    return o;
}

Outcome quantizer_quality() {
    Outcome o;
    Substream rng(31);
    std::vector<double> z(1000000);
    for (auto& x : z) x = rng.normal();
    const SampleSet gauss(std::move(z));
    auto g = quantile_grid(gauss, 2);
    for (int i = 0; i < 100; ++i) g = lloyd_pass(gauss, g);
    const double target = std::sqrt(2.0 / std::numbers::pi);
    const double opt = oracle::gaussian_two_point_optimum();
    o.require(std::abs(opt - target) < 1e-6 && std::abs(g.points[0] + target) <= 0.02 &&
                  std::abs(g.points[1] - target) <= 0.02,
              fmt("Gaussian N=2 fixed point (%.4f, %.4f), oracle optimum %.6f, target +-%.6f", g.points[0],
                  g.points[1], opt, target));

    const auto cfg = load_config(kConfigs + "bs.cfg");
    const auto rows = run_convergence(cfg, Sweep::parse("grid=30,60"));
    const double ratio = rows[1].estimate / rows[0].estimate;
    o.require(ratio >= 0.4 && ratio <= 0.65,
              fmt("RMS distortion at k=n: N=30 %.4f, N=60 %.4f, ratio %.3f in [0.4, 0.65]", rows[0].estimate,
                  rows[1].estimate, ratio));

    // Lloyd monotonicity on the step-n BS samples.
    const auto grid = cfg.time_grid();
    const auto fv = cfg.firm_model();
    std::vector<double> path(grid.steps() + 1), terminal;
    for (std::size_t p = 0; p < cfg.numerics.quantizer_paths; ++p) {
        Substream r(cfg.seed, "quantization", "grid-paths", p);
        euler_firm_path(fv, cfg.scenario.v0, grid, r, path);
        terminal.push_back(path.back());
    }
    const SampleSet set(std::move(terminal));
    auto q = quantile_grid(set, 60);
    bool monotone = true;
    double worst = -INFINITY;
    for (std::size_t it = 0; it < cfg.numerics.lloyd_iters; ++it) {
        const auto next = lloyd_pass(set, q);
        worst = std::max(worst, next.distortion - q.distortion);
        monotone = monotone && next.distortion <= q.distortion + 1e-12;
        q = next;
    }
    o.require(monotone, fmt("80 Lloyd passes, max per-pass change %.2e <= 1e-12", worst));
    return o;
}

Outcome spread_curve_shape() {
    Outcome o;
    const auto& r = bs_run();
    const auto& first = r.curve.entries.front();
    o.require(first.maturity == 1.1 && first.spread > 0.0,
              fmt("partial information spread at t=1.1: %.3f bp > 0", 1e4 * first.spread));

    const double v1 = r.obs.hidden.back();
    const auto fv = r.cfg.firm_model();
    const auto full = survival_full_mc(fv, v1, 1.0, 1.1, r.cfg.scenario.barrier,
                                       r.cfg.numerics.euler_schedule.steps_for(1.1), kDeskTrials, r.cfg.seed);
    const double full_spread = spread(full.value, 1.0, 1.1);
    o.require(v1 > r.cfg.scenario.barrier * 1.05 && full_spread <= 1e-3,
              fmt("full information from V_1=%.2f: spread at t=1.1 %.3g bp <= 10 bp", v1, 1e4 * full_spread));
    o.require(r.curve.entries.size() == 100 && r.curve_seconds < 600.0,
              fmt("100-maturity curve at M=1e4 in %.1fs < 600s", r.curve_seconds));

    // Three observation paths: lowest, median and highest S_1 among indices 1..50.
    std::vector<std::pair<double, std::uint64_t>> terminal;
    for (std::uint64_t i = 1; i <= 50; ++i)
        terminal.emplace_back(observe(r.cfg, ObservationSource::simulated(i)).prices.values.back(), i);
    std::sort(terminal.begin(), terminal.end());
    const std::uint64_t picks[] = {terminal.front().second, terminal[25].second, terminal.back().second};
    auto short_scn = r.cfg.scenario;
    short_scn.maturities = {1.1, 1.2, 1.3};
    std::vector<double> s1, short_spreads[3];
    for (auto idx : picks) {
        const auto obs = observe(r.cfg, ObservationSource::simulated(idx));
        const auto f = run_filter(obs.prices, r.cache.sequence, r.cache.transitions, fv, r.cfg.observation,
                                  r.cfg.time_grid());
        const auto c = spread_curve(f, fv, short_scn, r.cfg.numerics.euler_schedule, kDeskTrials, r.cfg.seed);
        s1.push_back(obs.prices.values.back());
        for (int m = 0; m < 3; ++m) short_spreads[m].push_back(c.entries[m].spread);
    }
    bool antitone = true;
    std::string listing;
    for (int m = 0; m < 3; ++m) {
        antitone = antitone && short_spreads[m][0] > short_spreads[m][1] && short_spreads[m][1] > short_spreads[m][2];
        listing += fmt(" t=%.1f:", short_scn.maturities[m]);
        for (int p = 0; p < 3; ++p) listing += fmt(" %.2f", 1e4 * short_spreads[m][p]);
    }
    o.require(antitone, fmt("S_1 = %.2f < %.2f < %.2f gives decreasing short spreads (bp)", s1[0], s1[1], s1[2]) +
                            listing);
    return o;
}

Outcome rates() {
    Outcome o;
    auto cfg = load_config(kConfigs + "bs.cfg");
    const double t_long = cfg.scenario.maturities.back();
    const auto m_rows = run_convergence(cfg, Sweep::parse("M=1000,4000,16000"), t_long);
    for (std::size_t i = 0; i + 1 < m_rows.size(); ++i) {
        const double ratio = m_rows[i].std_error / m_rows[i + 1].std_error;
        o.require(ratio >= 1.6 && ratio <= 2.4,
                  fmt("stderr(M=%zu)/stderr(M=%zu) = %.3f in [1.6, 2.4]", m_rows[i].value, m_rows[i + 1].value, ratio));
    }

    // Over one year the Euler bias is below the Monte Carlo noise; the longest
    // maturity makes it the dominant term.
    cfg.numerics.mc_trials = 1000000;
    const auto n_rows = run_convergence(cfg, Sweep::parse("N=25,50,100,200"), t_long);
    const double d1 = std::abs(n_rows[0].estimate - n_rows[1].estimate);
    const double d2 = std::abs(n_rows[1].estimate - n_rows[2].estimate);
    const double d3 = std::abs(n_rows[2].estimate - n_rows[3].estimate);
    o.require(d1 >= d2 && d2 >= d3, fmt("t=11, M=1e6: |v(N)-v(2N)| for N=25,50,100: %.2e >= %.2e >= %.2e", d1, d2, d3));
    const double e25 = n_rows[0].abs_error, e50 = n_rows[1].abs_error, e100 = n_rows[2].abs_error;
    o.require(e25 >= e50 && e50 >= e100,
              fmt("|v(N) - closed| for N=25,50,100: %.2e >= %.2e >= %.2e (se %.1e)", e25, e50, e100,
                  n_rows[2].std_error));

    bool decreasing = true;
    double prev = correlation_bs(0.1, 0.05, 0.1);
    for (int i = 1; i <= 1090; ++i) {
        const double rho = correlation_bs(0.1 + 0.01 * i, 0.05, 0.1);
        decreasing = decreasing && rho < prev;
        prev = rho;
    }
    o.require(decreasing, fmt("rho(t) strictly decreasing on [0.1, 11]: rho(0.1)=%.5f rho(11)=%.5f",
                              correlation_bs(0.1, 0.05, 0.1), correlation_bs(11.0, 0.05, 0.1)));
    return o;
}

Outcome cev_smoke() {
    Outcome o;
    const auto cfg = desk("cev.cfg");
    const auto* cev = cfg.firm_model().as_cev();
    const double vol0 = cev->gamma * std::pow(cfg.scenario.v0, cev->beta);
    o.require(vol0 >= 0.099 && vol0 <= 0.101, fmt("gamma * v0^beta = %.5f in [0.099, 0.101]", vol0));

    const fs::path out = fs::temp_directory_path() / "quantcredit_acceptance_cev";
    fs::remove_all(out);
    const auto r = run_pipeline(cfg, ObservationSource::simulated(0), out);
    bool files = true;
    for (const char* name : {artifact::grid, artifact::observations, artifact::filter, artifact::spreads,
                             artifact::observed_plot, artifact::curve_plot, artifact::manifest})
        files = files && fs::exists(out / name);
    o.require(files, "end-to-end run wrote every artifact");

    bool filter_ok = true;
    run_filter(r.observations.prices, r.cache.sequence, r.cache.transitions, cfg.firm_model(), cfg.observation,
               cfg.time_grid(), [&](const FilterDistribution& f) { filter_ok = filter_ok && weights_valid(f, 1e-10); });
    bool survival_ok = true;
    for (std::size_t m = 0; m < r.curve.entries.size(); ++m) {
        const auto& e = r.curve.entries[m];
        survival_ok = survival_ok && e.survival >= 0.0 && e.survival <= 1.0 && e.std_error >= 0.0 && e.spread >= 0.0;
        if (m > 0) survival_ok = survival_ok && e.survival <= r.curve.entries[m - 1].survival;
    }
    o.require(filter_ok && survival_ok, "filter weights valid at every step; survival in [0,1], nonincreasing");

    const auto& bs = bs_run().curve;
    std::size_t higher = 0;
    double min_gap = INFINITY;
    for (std::size_t m = 0; m < bs.entries.size(); ++m) {
        higher += r.curve.entries[m].spread > bs.entries[m].spread;
        min_gap = std::min(min_gap, r.curve.entries[m].spread - bs.entries[m].spread);
    }
    o.require(higher == bs.entries.size(),
              fmt("CEV spread above BS at %zu/%zu maturities (t=1.1: %.2f vs %.2f bp, min gap %.2f bp)", higher,
                  bs.entries.size(), 1e4 * r.curve.entries[0].spread, 1e4 * bs.entries[0].spread, 1e4 * min_gap));
    return o;
}

Outcome determinism() {
    Outcome o;
    auto cfg = desk("bs.cfg");
    const fs::path a = fs::temp_directory_path() / "quantcredit_acceptance_w1";
    const fs::path b = fs::temp_directory_path() / "quantcredit_acceptance_w4";
    fs::remove_all(a);
    fs::remove_all(b);
    cfg.numerics.workers = 1;
    run_pipeline(cfg, ObservationSource::simulated(0), a);
    cfg.numerics.workers = 4;
    run_pipeline(cfg, ObservationSource::simulated(0), b);
    std::string differing;
    for (const char* name : {artifact::grid, artifact::observations, artifact::filter, artifact::spreads,
                             artifact::manifest})
        if (slurp(a / name) != slurp(b / name) || slurp(a / name).empty()) differing += std::string(" ") + name;
    o.require(differing.empty(), "workers=1 vs workers=4: grid, observation, filter and spread files byte-identical" +
                                     (differing.empty() ? std::string() : " (differ:" + differing + ")"));
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"GBM oracle equivalence", gbm_oracle},
        {"bridge beats naive monitoring", bridge_beats_naive},
        {"filter oracle", filter_oracle},
        {"filter invariants", filter_invariants},
        {"quantizer quality", quantizer_quality},
        {"spread-curve qualitative reproduction", spread_curve_shape},
        {"rates", rates},
        {"CEV smoke", cev_smoke},
        {"determinism", determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = clock_type::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        failed += !out.pass;
        std::printf("%s [%d] %s (%.1fs): %s\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    since(t0), out.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

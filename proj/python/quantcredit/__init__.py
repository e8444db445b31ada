"""Credit spreads under partial information via quantized filtering."""

from ._core import (
    ScenarioConfig,
    SurvivalEstimate,
    ValidationError,
    __version__,
    bridge_survival_factor,
    correlation_bs,
    lloyd,
    load_config,
    parse_config,
    run_convergence,
    run_pipeline,
    spread,
    survival_full_mc,
    survival_gbm_closed,
    survival_naive_mc,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]

from .csvio import format_float, write_csv, write_summary
from .solver_order import ScalingResult, fit_loglog_slope, solver_order_experiment
from .maxerror import ComparisonResult, constructed_worst_cases, maxerror_comparison
from .sweeps import alpha_sweep, energy_curves, horizon_sweep, ratio_sweep, reversal_track

__all__ = [
    "format_float",
    "write_csv",
    "write_summary",
    "ScalingResult",
    "fit_loglog_slope",
    "solver_order_experiment",
    "ComparisonResult",
    "constructed_worst_cases",
    "maxerror_comparison",
    "alpha_sweep",
    "energy_curves",
    "horizon_sweep",
    "ratio_sweep",
    "reversal_track",
]

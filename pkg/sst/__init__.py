from .significance import (
    CalibrationResult,
    ImfStat,
    SstReport,
    anchor_shift,
    assess_series,
    calibrate_sst,
    classify_significance,
    energy_density,
    k_for,
    mean_period,
    normalize_series,
    spread_lines,
)

__all__ = [
    "CalibrationResult",
    "ImfStat",
    "SstReport",
    "anchor_shift",
    "assess_series",
    "calibrate_sst",
    "classify_significance",
    "energy_density",
    "k_for",
    "mean_period",
    "normalize_series",
    "spread_lines",
]

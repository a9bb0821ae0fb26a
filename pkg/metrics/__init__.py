from .correlation import (
    CorrelationResult,
    DominantImf,
    PValue,
    correlate,
    dominant_imf,
    imf_correlations,
    p_value,
    pearson,
)

__all__ = [
    "CorrelationResult",
    "DominantImf",
    "PValue",
    "correlate",
    "dominant_imf",
    "imf_correlations",
    "p_value",
    "pearson",
]

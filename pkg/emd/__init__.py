from .sift import (
    Imf,
    ImfSet,
    SiftConfig,
    envelope_mean,
    find_extrema,
    sift,
    zero_crossings,
)

__all__ = [
    "Imf",
    "ImfSet",
    "SiftConfig",
    "envelope_mean",
    "find_extrema",
    "sift",
    "zero_crossings",
]

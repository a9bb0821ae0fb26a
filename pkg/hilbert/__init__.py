from .analytic import (
    AnalyticSignal,
    InstantaneousFrequency,
    TimeScale,
    analytic_signal,
    count_timescale,
    inst_frequency,
    mean_timescale,
)

__all__ = [
    "AnalyticSignal",
    "InstantaneousFrequency",
    "TimeScale",
    "analytic_signal",
    "count_timescale",
    "inst_frequency",
    "mean_timescale",
]

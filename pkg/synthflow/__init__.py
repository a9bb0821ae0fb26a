from .generator import RegimeFlowSpec, gen_flow, spec_stream
from .sweeps import (
    SWEEP_AXES,
    SweepExperiment,
    SweepGrid,
    SweepSummary,
    build_sweep,
    common_horizon,
    crash_schedule,
    flow_table,
    run_sweep,
)

__all__ = [
    "SWEEP_AXES",
    "RegimeFlowSpec",
    "SweepExperiment",
    "SweepGrid",
    "SweepSummary",
    "build_sweep",
    "common_horizon",
    "crash_schedule",
    "flow_table",
    "gen_flow",
    "run_sweep",
    "spec_stream",
]

from .config import (
    AnalysisToggles,
    ExperimentConfig,
    FlowSource,
    SegmentConfig,
    config_hash,
    dated_schedule,
    load_config,
    parse_config,
    resolve_data_path,
    synthetic_schedule,
)
from .csvfiles import (
    SectorFlows,
    align,
    load_financials,
    load_flows,
    load_prices,
    load_sector_flows,
    summarize_sector_flows,
    write_flows,
    write_prices,
    write_table,
)
from .plots import Panel, Series, render_svg, write_svg
from .run import ArtifactBundle, ExperimentRun, SimulationInputs, output_dir, run_experiment, write_manifest

__all__ = [
    "AnalysisToggles",
    "ArtifactBundle",
    "ExperimentConfig",
    "ExperimentRun",
    "FlowSource",
    "Panel",
    "SectorFlows",
    "SegmentConfig",
    "Series",
    "SimulationInputs",
    "align",
    "config_hash",
    "dated_schedule",
    "load_config",
    "load_financials",
    "load_flows",
    "load_prices",
    "load_sector_flows",
    "output_dir",
    "parse_config",
    "render_svg",
    "resolve_data_path",
    "run_experiment",
    "summarize_sector_flows",
    "synthetic_schedule",
    "write_flows",
    "write_manifest",
    "write_prices",
    "write_svg",
    "write_table",
]

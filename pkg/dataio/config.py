import datetime
import hashlib
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Union

import numpy as np
import yaml

from emd import SiftConfig
from model import CompanyFinancials, RegimeKind, RegimeSchedule, RegimeSegment, ShapeThresholds
from synthflow import SWEEP_AXES, RegimeFlowSpec, SweepGrid
from utils import consts
from utils.errors import ConfigError, RecoveryLabError

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {
    "name",
    "seed",
    "p0",
    "phi",
    "financials",
    "flow",
    "segments",
    "sweep",
    "analysis",
    "sift",
    "shape",
    "confidence",
    "workers",
    "output",
    "sector_flows",
    "notes",
}
SEGMENT_KEYS = {"kind", "start", "length", "lambda", "theta", "mu", "sigma", "note"}


@dataclass(frozen=True)
class SegmentConfig:
    kind: RegimeKind
    lam: float
    theta: Optional[int] = None
    start: Optional[np.datetime64] = None
    length: Optional[int] = None
    mu: Optional[float] = None
    sigma: Optional[float] = None

    @property
    def label(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class FlowSource:
    source: str = "synthetic"
    flows: Optional[str] = None
    prices: Optional[str] = None


@dataclass(frozen=True)
class AnalysisToggles:
    emd: bool = True
    sst: bool = True
    timescale: bool = True
    correlations: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    flow: FlowSource
    segments: tuple[SegmentConfig, ...] = ()
    seed: int = 0
    p0: Optional[float] = None
    phi: Optional[float] = None
    financials: Union[tuple[CompanyFinancials, ...], str, None] = None
    sweep: Optional[SweepGrid] = None
    analysis: AnalysisToggles = AnalysisToggles()
    sift: SiftConfig = SiftConfig()
    shape: ShapeThresholds = ShapeThresholds()
    confidence: float = consts.DEFAULT_CONFIDENCE
    workers: Union[int, str, None] = None
    output: Optional[str] = None
    sector_flows: Optional[str] = None
    source: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @property
    def is_sweep(self) -> bool:
        return self.sweep is not None

    @property
    def is_file_based(self) -> bool:
        return self.flow.source == "file"

    def config_hash(self) -> str:
        return config_hash(self.source)


def config_hash(mapping: Mapping[str, Any]) -> str:
    canonical = yaml.safe_dump(dict(mapping), sort_keys=True, default_flow_style=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def resolve_data_path(path: str, data_dir: Optional[str] = None) -> str:
    """Prefix a relative data path with ``data_dir`` or ``$RECOVERY_LAB_DATA``."""
    if os.path.isabs(path):
        return path
    prefix = data_dir or os.getenv(consts.DATA_DIR_ENV_VAR)
    return os.path.join(prefix, path) if prefix else path


def _section(mapping: Mapping, name: str, cls, allowed: Mapping[str, str]):
    values = mapping.get(name) or {}
    if not isinstance(values, Mapping):
        raise ConfigError(f"'{name}' must be a mapping")
    unknown = set(values) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {', '.join(sorted(unknown))}")
    return cls(**{allowed[k]: v for k, v in values.items()})


def _date(value, where: str) -> np.datetime64:
    if isinstance(value, (datetime.date, str)):
        try:
            return np.datetime64(value, "D")
        except ValueError as e:
            raise ConfigError(f"{where}: invalid date '{value}'") from e
    raise ConfigError(f"{where}: invalid date '{value}'")


def _segment(raw: Mapping, position: int) -> SegmentConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"segment {position} must be a mapping")
    where = f"segment {position} ({raw.get('kind', '?')})"
    unknown = set(raw) - SEGMENT_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(sorted(unknown))}")
    if "kind" not in raw or "lambda" not in raw:
        raise ConfigError(f"{where}: 'kind' and 'lambda' are required")
    if ("start" in raw) == ("length" in raw):
        raise ConfigError(f"{where}: give exactly one of 'start' or 'length'")
    try:
        kind = RegimeKind(raw["kind"])
        # validates lambda and theta
        RegimeSegment(kind=kind, length=0, lam=raw["lambda"], theta=raw.get("theta"))
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{where}: {e}") from e
    return SegmentConfig(
        kind=kind,
        lam=float(raw["lambda"]),
        theta=raw.get("theta"),
        start=_date(raw["start"], where) if "start" in raw else None,
        length=raw.get("length"),
        mu=raw.get("mu"),
        sigma=raw.get("sigma"),
    )


def _sweep(raw: Mapping, seed: int) -> SweepGrid:
    if not isinstance(raw, Mapping):
        raise ConfigError("'sweep' must be a mapping")
    unknown = set(raw) - {"axis", "values", "fixed", "seeds", "seed_count", "recovery_end"}
    if unknown:
        raise ConfigError(f"unknown key(s) in 'sweep': {', '.join(sorted(unknown))}")
    if raw.get("axis") not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}, got '{raw.get('axis')}'")
    if "seeds" in raw and "seed_count" in raw:
        raise ConfigError("give either 'seeds' or 'seed_count' in 'sweep'")
    seeds = raw.get("seeds")
    if seeds is None:
        seeds = range(seed, seed + int(raw.get("seed_count", 1)))
    return SweepGrid(
        axis=raw["axis"],
        values=tuple(raw.get("values") or ()),
        fixed=raw.get("fixed") or {},
        seeds=tuple(seeds),
        recovery_end=raw.get("recovery_end"),
    )


def parse_config(
    mapping: Mapping[str, Any], seed: Optional[int] = None, output: Optional[str] = None
) -> ExperimentConfig:
    """Validate a config mapping; ``seed`` and ``output`` override the file."""
    if not isinstance(mapping, Mapping):
        raise ConfigError("config must be a mapping at the top level")
    unknown = set(mapping) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    resolved = dict(mapping)
    if seed is not None:
        resolved["seed"] = seed
    if output is not None:
        resolved["output"] = output
    base_seed = int(resolved.get("seed", 0))

    flow_raw = resolved.get("flow") or {"source": "synthetic"}
    flow = _section({"flow": flow_raw}, "flow", FlowSource, {"source": "source", "flows": "flows", "prices": "prices"})
    if flow.source == "file":
        if not flow.flows or not flow.prices:
            raise ConfigError("a file flow source needs both 'flows' and 'prices'")
    elif flow.source == "synthetic":
        if flow.flows or flow.prices:
            raise ConfigError("a synthetic flow source takes no file paths")
    else:
        raise ConfigError(f"flow source must be 'file' or 'synthetic', got '{flow.source}'")

    segments = tuple(_segment(raw, i + 1) for i, raw in enumerate(resolved.get("segments") or ()))
    sweep = _sweep(resolved["sweep"], base_seed) if resolved.get("sweep") is not None else None
    if sweep is None and not segments:
        raise ConfigError("a config needs 'segments' or a 'sweep'")
    if sweep is not None and flow.source != "synthetic":
        raise ConfigError("sweeps run on synthetic flow only")
    for i, segment in enumerate(segments, start=1):
        if flow.source == "file" and segment.start is None:
            raise ConfigError(f"segment {i} ({segment.label}): file-based runs place segments by 'start' date")
        if flow.source == "synthetic" and segment.length is None:
            raise ConfigError(f"segment {i} ({segment.label}): synthetic runs size segments by 'length'")

    has_phi = resolved.get("phi") is not None
    has_financials = resolved.get("financials") is not None
    if sweep is None and has_phi == has_financials:
        raise ConfigError("give exactly one of 'phi' or 'financials'")
    financials = resolved.get("financials")
    if isinstance(financials, list):
        try:
            financials = tuple(
                CompanyFinancials(
                    current_assets=float(f["current_assets"]),
                    current_liabilities=float(f["current_liabilities"]),
                    operating_expenses=float(f["operating_expenses"]),
                    company=str(f.get("company", "")),
                )
                for f in financials
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid 'financials' entry: {e}") from e

    try:
        return ExperimentConfig(
            name=str(resolved.get("name", "experiment")),
            flow=flow,
            segments=segments,
            seed=base_seed,
            p0=resolved.get("p0"),
            phi=resolved.get("phi"),
            financials=financials,
            sweep=sweep,
            analysis=_section(
                resolved, "analysis", AnalysisToggles, {k: k for k in ("emd", "sst", "timescale", "correlations")}
            ),
            sift=_section(
                resolved,
                "sift",
                SiftConfig,
                {"sd_threshold": "sd_threshold", "max_iterations": "max_iterations", "max_imfs": "max_imfs"},
            ),
            shape=_section(
                resolved,
                "shape",
                ShapeThresholds,
                {
                    k: k
                    for k in (
                        "trough_fraction",
                        "u_dwell",
                        "swoosh_horizon_factor",
                        "l_recovered_fraction",
                        "u_recovery_level",
                    )
                },
            ),
            confidence=float(resolved.get("confidence", consts.DEFAULT_CONFIDENCE)),
            workers=resolved.get("workers"),
            output=resolved.get("output"),
            sector_flows=resolved.get("sector_flows"),
            source=resolved,
        )
    except TypeError as e:
        raise ConfigError(f"invalid config: {e}") from e


def load_config(path: str, seed: Optional[int] = None, output: Optional[str] = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as f:
            mapping = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config '{path}': {e}") from e
    logger.info("Loaded config '%s'", path)
    return parse_config(mapping or {}, seed=seed, output=output)


def synthetic_schedule(config: ExperimentConfig) -> tuple[RegimeSchedule, tuple[RegimeFlowSpec, ...]]:
    segments, specs = [], []
    for i, s in enumerate(config.segments, start=1):
        try:
            segments.append(RegimeSegment(kind=s.kind, length=s.length, lam=s.lam, theta=s.theta))
            default = RegimeFlowSpec.default(s.kind, s.length)
            specs.append(
                RegimeFlowSpec(
                    kind=s.kind,
                    mu=default.mu if s.mu is None else s.mu,
                    sigma=default.sigma if s.sigma is None else s.sigma,
                    length=s.length,
                )
            )
        except RecoveryLabError as e:
            raise ConfigError(f"segment {i} ({s.label}): {e}") from e
    return RegimeSchedule(tuple(segments)), tuple(specs)


def dated_schedule(config: ExperimentConfig, dates: np.ndarray) -> tuple[RegimeSchedule, int]:
    """Resolve segment start dates against a trading calendar.

    Each start snaps to the first trading day on or after it. The simulation
    window begins at the first segment and runs to the end of the calendar.

    Returns:
        The schedule over ``len(window) - 1`` steps and the calendar offset of the window.
    """
    first, last = dates[0], dates[-1]
    offsets = []
    for i, s in enumerate(config.segments, start=1):
        if s.start > last or (i > 1 and s.start < first):
            raise ConfigError(
                f"segment {i} ({s.label}) starts {s.start}, outside the data range {first} to {last}"
            )
        offsets.append(int(np.searchsorted(dates, s.start)))
        if i > 1 and offsets[-1] <= offsets[-2]:
            raise ConfigError(f"segment {i} ({s.label}) starts {s.start}, not after the previous segment")
    window_start = offsets[0]
    steps = len(dates) - 1 - window_start
    ends = offsets[1:] + [len(dates) - 1]
    segments = [
        RegimeSegment(kind=s.kind, length=end - start, lam=s.lam, theta=s.theta)
        for s, start, end in zip(config.segments, offsets, ends)
    ]
    schedule = RegimeSchedule(tuple(segments))
    if schedule.total_length != steps:
        raise ConfigError(f"segments cover {schedule.total_length} steps, the data window has {steps}")
    return schedule, window_start

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from model import (
    PriceSeries,
    RecoveryShape,
    RegimeKind,
    RegimeSchedule,
    RegimeSegment,
    ShapeThresholds,
    classify_recovery,
    simulate,
)
from utils import consts
from utils.errors import InvalidGrid
from utils.workers import resolve_workers

from .generator import RegimeFlowSpec, gen_flow, spec_stream

logger = logging.getLogger(__name__)

SWEEP_AXES = ("T_S", "T_N", "phi", "lambda_recovery")


@dataclass(frozen=True)
class SweepGrid:
    axis: str
    values: tuple
    fixed: Mapping[str, float] = field(default_factory=dict)
    seeds: tuple = (0,)
    # days after the shock start at which recovery ends for every grid value
    recovery_end: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "seeds", tuple(self.seeds))
        object.__setattr__(self, "fixed", dict(self.fixed))


@dataclass(frozen=True)
class SweepExperiment:
    axis: str
    value: float
    seed: int
    params: tuple
    schedule: RegimeSchedule
    specs: tuple
    phi: float
    p0: float = consts.SYNTHETIC_P0

    def flows(self) -> np.ndarray:
        return gen_flow(self.specs, spec_stream(self.seed, self.specs))

    def run(self) -> PriceSeries:
        return simulate(self.p0, self.flows(), self.schedule, self.phi)


def crash_schedule(
    shock_days: int,
    negative_days: int,
    lambda_recovery: float = consts.REGIME_FLOW_DEFAULTS["recovery"][2],
    normal_days: int = consts.NORMAL_LENGTH,
    recovery_days: int = consts.RECOVERY_LENGTH,
    post_recovery_days: int = consts.POST_RECOVERY_LENGTH,
) -> tuple[RegimeSchedule, tuple[RegimeFlowSpec, ...]]:
    """Five-regime schedule with the synthetic defaults, plus matching flow laws."""
    lengths = {
        RegimeKind.NORMAL: normal_days,
        RegimeKind.SHOCK: shock_days,
        RegimeKind.NEGATIVE_SENTIMENT: negative_days,
        RegimeKind.RECOVERY: recovery_days,
        RegimeKind.POST_RECOVERY: post_recovery_days,
    }
    segments = []
    specs = []
    for kind, length in lengths.items():
        lam = lambda_recovery if kind is RegimeKind.RECOVERY else consts.REGIME_FLOW_DEFAULTS[kind.value][2]
        segments.append(RegimeSegment(kind=kind, length=length, lam=lam))
        specs.append(RegimeFlowSpec.default(kind, length))
    return RegimeSchedule(tuple(segments)), tuple(specs)


def _check_value(axis: str, value) -> None:
    if axis in ("T_S", "T_N"):
        lowest = 1 if axis == "T_S" else 0
        if isinstance(value, bool) or int(value) != value or value < lowest:
            raise InvalidGrid(f"{axis} values must be integers >= {lowest}, got {value}")
    elif axis == "phi":
        if not math.isfinite(value):
            raise InvalidGrid(f"phi values must be finite, got {value}")
    elif not 0 < value <= 1:
        raise InvalidGrid(f"lambda_recovery values must be in (0, 1], got {value}")


def build_sweep(grid: SweepGrid) -> list[SweepExperiment]:
    """Expand a grid into one experiment per grid value and seed, values outermost.

    Raises:
        InvalidGrid: on an unknown axis or fixed key, an empty or repeated value
            or seed list, or a value the axis cannot take.
    """
    if grid.axis not in SWEEP_AXES:
        raise InvalidGrid(f"unknown sweep axis '{grid.axis}', expected one of {', '.join(SWEEP_AXES)}")
    if not grid.values:
        raise InvalidGrid(f"{grid.axis} sweep has no values")
    if len(set(grid.values)) != len(grid.values):
        raise InvalidGrid(f"{grid.axis} sweep values must be distinct")
    if not grid.seeds:
        raise InvalidGrid("sweep has no seeds")
    if len(set(grid.seeds)) != len(grid.seeds):
        raise InvalidGrid("sweep seeds must be distinct")
    for seed in grid.seeds:
        if isinstance(seed, bool) or int(seed) != seed or seed < 0:
            raise InvalidGrid(f"seeds must be non-negative integers, got {seed}")
    unknown = set(grid.fixed) - set(SWEEP_AXES)
    if unknown:
        raise InvalidGrid(f"unknown fixed sweep parameters: {', '.join(sorted(unknown))}")

    fixed = {**consts.SWEEP_FIXED_DEFAULTS[grid.axis], **grid.fixed}
    fixed.pop(grid.axis, None)
    for name, value in fixed.items():
        _check_value(name, value)

    experiments = []
    for value in grid.values:
        _check_value(grid.axis, value)
        params = {**fixed, grid.axis: value}
        recovery_days = consts.RECOVERY_LENGTH
        if grid.recovery_end is not None:
            recovery_days = int(grid.recovery_end) - int(params["T_S"]) - int(params["T_N"])
            if recovery_days < 1:
                raise InvalidGrid(
                    f"recovery_end {grid.recovery_end} leaves no recovery day "
                    f"for T_S={params['T_S']}, T_N={params['T_N']}"
                )
        schedule, specs = crash_schedule(
            shock_days=int(params["T_S"]),
            negative_days=int(params["T_N"]),
            lambda_recovery=params["lambda_recovery"],
            recovery_days=recovery_days,
        )
        for seed in grid.seeds:
            experiments.append(
                SweepExperiment(
                    axis=grid.axis,
                    value=value,
                    seed=int(seed),
                    params=tuple(sorted(params.items())),
                    schedule=schedule,
                    specs=specs,
                    phi=float(params["phi"]),
                )
            )
    return experiments


@dataclass(frozen=True)
class SweepSummary:
    """Seed-aggregated outcome for one grid value."""

    value: float
    seeds: tuple
    paths: np.ndarray
    median_path: PriceSeries
    schedule: RegimeSchedule
    shape: RecoveryShape

    @property
    def terminal_prices(self) -> np.ndarray:
        return self.paths[:, -1]

    def recovery_rates(self) -> np.ndarray:
        """Mean simple daily return over the recovery segment, per seed."""
        mask = self.schedule.mask_of(RegimeKind.RECOVERY)
        returns = self.paths[:, 1:] / self.paths[:, :-1] - 1.0
        return returns[:, mask].mean(axis=1)


def run_sweep(
    grid: SweepGrid,
    workers: Union[int, str, None] = None,
    thresholds: ShapeThresholds = ShapeThresholds(),
) -> list[SweepSummary]:
    """Simulate every experiment of ``grid`` and aggregate per grid value.

    Results do not depend on the worker count.
    """
    experiments = build_sweep(grid)
    max_workers = resolve_workers(workers)
    logger.info(
        "Running %s sweep: %d values x %d seeds on %d worker(s)",
        grid.axis,
        len(grid.values),
        len(grid.seeds),
        max_workers,
    )
    if max_workers == 1:
        paths = [experiment.run() for experiment in experiments]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            paths = list(executor.map(SweepExperiment.run, experiments))

    summaries = []
    per_value = len(grid.seeds)
    for i, value in enumerate(grid.values):
        chunk = paths[i * per_value : (i + 1) * per_value]
        schedule = experiments[i * per_value].schedule
        stacked = np.vstack([p.values for p in chunk])
        median_path = PriceSeries(values=np.median(stacked, axis=0))
        summaries.append(
            SweepSummary(
                value=value,
                seeds=grid.seeds,
                paths=stacked,
                median_path=median_path,
                schedule=schedule,
                shape=classify_recovery(median_path, schedule, thresholds),
            )
        )
    return summaries


def flow_table(grid: SweepGrid, seed: Optional[int] = None) -> dict[str, np.ndarray]:
    """Synthetic flow of each grid value for one seed, keyed by column name."""
    seed = grid.seeds[0] if seed is None else seed
    single = replace(grid, seeds=(seed,))
    return {f"{grid.axis}={e.value}": e.flows() for e in build_sweep(single)}


def common_horizon(summaries: Sequence[SweepSummary]) -> int:
    """Days after the shock start that every grid value reaches the end of its recovery."""
    spans = []
    for s in summaries:
        start = s.schedule.start_of(RegimeKind.SHOCK)
        end = s.schedule.end_of(RegimeKind.RECOVERY)
        spans.append(end - start)
    horizon = max(spans)
    available = min(s.paths.shape[1] - 1 - s.schedule.start_of(RegimeKind.SHOCK) for s in summaries)
    return min(horizon, available)

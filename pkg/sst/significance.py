import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import stats

from emd import ImfSet, SiftConfig, find_extrema, sift
from utils import consts
from utils.arrays import readonly
from utils.errors import ConstantSeries, EmptySeries, NoMaxima
from utils.workers import resolve_workers

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImfStat:
    n: int
    energy: float
    period: float
    shift: float = 0.0

    @property
    def x(self) -> float:
        return math.log(self.period)

    @property
    def ln_energy(self) -> float:
        """ln of the energy density, -inf for an all-zero IMF."""
        return math.log(self.energy) if self.energy > 0 else -math.inf

    @property
    def y(self) -> float:
        """Rescaled ln energy, the value tested against the spread lines."""
        return self.ln_energy + self.shift

    @property
    def defined(self) -> bool:
        return self.energy > 0

    @property
    def excluded(self) -> bool:
        return self.n == 1


@dataclass(frozen=True)
class SstReport:
    stats: tuple[ImfStat, ...]
    confidence: float
    k: float
    n_samples: int
    spread: tuple[np.ndarray, np.ndarray, np.ndarray]
    significant: tuple[bool, ...]

    def significant_indices(self) -> list[int]:
        return [s.n for s, flag in zip(self.stats, self.significant) if flag]


def energy_density(imf, n: Optional[int] = None) -> float:
    values = np.asarray(getattr(imf, "values", imf), dtype=float)
    n = values.size if n is None else n
    if values.size == 0 or n <= 0:
        raise EmptySeries("energy density of an empty IMF is undefined")
    return float(np.sum(values**2) / n)


def mean_period(imf, method: str = "count") -> float:
    """Mean period in samples.

    ``"count"`` is the length over the number of local maxima; ``"spectrum"``
    weights the Fourier power spectrum, sum(S) / sum(S * f) over positive
    frequencies.

    Raises:
        NoMaxima: if there is nothing to count (or no power away from zero frequency).
    """
    values = np.asarray(getattr(imf, "values", imf), dtype=float)
    if method == "count":
        maxima, _ = find_extrema(values)
        if maxima.size == 0:
            raise NoMaxima("IMF has no local maximum, its mean period is undefined")
        return values.size / maxima.size
    if method == "spectrum":
        power = np.abs(np.fft.rfft(values - values.mean())) ** 2
        freqs = np.fft.rfftfreq(values.size)
        power, freqs = power[1:], freqs[1:]
        weighted = np.sum(power * freqs)
        if weighted == 0:
            raise NoMaxima("IMF carries no oscillatory power")
        return float(np.sum(power) / weighted)
    raise ValueError(f"unknown mean period method '{method}'")


def k_for(confidence: float) -> float:
    if confidence in consts.K_BY_CONFIDENCE:
        return consts.K_BY_CONFIDENCE[confidence]
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    return float(abs(stats.norm.ppf((1 - confidence) / 2)))


def spread_lines(x, n: int, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper white-noise spread lines ``-x -/+ k * sqrt(2/n) * exp(x/2)``."""
    x = np.asarray(x, dtype=float)
    half_width = k * math.sqrt(2.0 / n) * np.exp(x / 2)
    return -x - half_width, -x + half_width


def anchor_shift(imf_stats) -> float:
    """Offset added to every ln energy so that IMF 1 sits on ``y = -x``; 0 without a usable IMF 1."""
    first = next((s for s in imf_stats if s.n == 1), None)
    if first is None or not first.defined:
        return 0.0
    return -first.x - first.ln_energy


def classify_significance(
    imfset: ImfSet,
    n: Optional[int] = None,
    confidence: float = consts.DEFAULT_CONFIDENCE,
    method: str = "count",
) -> SstReport:
    """Place each IMF in the (ln period, ln energy) plane and test it against white noise.

    Every ln energy is first shifted by the offset that puts IMF 1 on the
    center line ``y = -x``. IMF n >= 2 is significant when its shifted value
    lies above the upper spread line. IMF 1 is reported but never marked. The
    decomposed series is expected to have unit variance, see :func:`assess_series`.
    """
    n = len(imfset.residue) if n is None else n
    k = k_for(confidence)
    raw = [ImfStat(n=imf.index, energy=energy_density(imf, n), period=mean_period(imf, method)) for imf in imfset.imfs]
    shift = anchor_shift(raw)
    imf_stats = tuple(ImfStat(n=s.n, energy=s.energy, period=s.period, shift=shift) for s in raw)
    significant = []
    for stat in imf_stats:
        _, upper = spread_lines(stat.x, n, k)
        significant.append(bool(not stat.excluded and stat.defined and stat.y > upper))

    xs = [s.x for s in imf_stats] or [0.0]
    grid = np.linspace(min(0.0, min(xs)), max(xs) + 0.5, 101)
    lower, upper = spread_lines(grid, n, k)
    return SstReport(
        stats=imf_stats,
        confidence=confidence,
        k=k,
        n_samples=n,
        spread=(readonly(grid), readonly(lower), readonly(upper)),
        significant=tuple(significant),
    )


def normalize_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    std = x.std()
    if std == 0:
        raise ConstantSeries("cannot normalize a constant series")
    return (x - x.mean()) / std


def assess_series(
    series,
    confidence: float = consts.DEFAULT_CONFIDENCE,
    config: SiftConfig = SiftConfig(),
    method: str = "count",
) -> tuple[ImfSet, SstReport]:
    """Normalize to zero mean and unit variance, decompose, and test every IMF."""
    normalized = normalize_series(series)
    imfset = sift(normalized, config)
    return imfset, classify_significance(imfset, normalized.size, confidence, method)


@dataclass(frozen=True)
class CalibrationResult:
    trials: int
    points: int
    outside: int

    @property
    def fraction(self) -> float:
        return self.outside / self.points if self.points else 0.0


def _outside_band(seed: np.random.SeedSequence, n: int, confidence: float, config: SiftConfig) -> tuple[int, int]:
    noise = np.random.default_rng(seed).standard_normal(n)
    _, report = assess_series(noise, confidence, config)
    k = report.k
    points = outside = 0
    for stat in report.stats:
        if stat.excluded or not stat.defined:
            continue
        lower, upper = spread_lines(stat.x, n, k)
        points += 1
        outside += int(not lower <= stat.y <= upper)
    return points, outside


def calibrate_sst(
    trials: int = 200,
    n: int = 1000,
    seed: int = 0,
    confidence: float = consts.DEFAULT_CONFIDENCE,
    config: SiftConfig = SiftConfig(),
    workers: Union[int, str, None] = None,
) -> CalibrationResult:
    """Count white-noise IMF points (n >= 2) that fall outside the spread band."""
    seeds = np.random.SeedSequence(seed).spawn(trials)
    max_workers = resolve_workers(workers)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        counts = list(executor.map(lambda s: _outside_band(s, n, confidence, config), seeds))
    points = sum(p for p, _ in counts)
    outside = sum(o for _, o in counts)
    logger.info("White-noise calibration: %d of %d IMF points outside the band", outside, points)
    return CalibrationResult(trials=trials, points=points, outside=outside)

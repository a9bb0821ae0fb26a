"""
Empirical mode decomposition by sifting.

  find_extrema
  envelope_mean
  sift
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import find_peaks

from utils import consts
from utils.arrays import readonly
from utils.errors import ConstantSeries, InsufficientExtrema, TooShort

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SiftConfig:
    """Sifting controls.

    ``max_imfs`` of None means ``ceil(log2(N)) + 1``.
    """

    sd_threshold: float = consts.SD_THRESHOLD
    max_iterations: int = consts.MAX_SIFT_ITERATIONS
    max_imfs: Optional[int] = None
    residue_floor: float = consts.RESIDUE_FLOOR


@dataclass(frozen=True)
class Imf:
    index: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", readonly(self.values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def extrema_count(self) -> int:
        maxima, minima = find_extrema(self.values)
        return maxima.size + minima.size

    @property
    def zero_crossing_count(self) -> int:
        return zero_crossings(self.values)


@dataclass(frozen=True)
class ImfSet:
    imfs: tuple[Imf, ...]
    residue: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "imfs", tuple(self.imfs))
        object.__setattr__(self, "residue", readonly(self.residue))

    def __len__(self) -> int:
        return len(self.imfs)

    def __getitem__(self, index: int) -> Imf:
        """1-based access, matching IMF numbering."""
        if not 1 <= index <= len(self.imfs):
            raise IndexError(f"IMF index {index} out of range 1..{len(self.imfs)}")
        return self.imfs[index - 1]

    def matrix(self) -> np.ndarray:
        """IMFs as rows."""
        if not self.imfs:
            return np.empty((0, self.residue.size))
        return np.vstack([imf.values for imf in self.imfs])

    def reconstruct(self) -> np.ndarray:
        return self.matrix().sum(axis=0) + self.residue


def zero_crossings(series) -> int:
    signs = np.sign(np.asarray(series, dtype=float))
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def find_extrema(series) -> tuple[np.ndarray, np.ndarray]:
    """Strict local maxima and minima; a flat extremum is reported at its midpoint.

    Returns:
        Index arrays ``(maxima, minima)``. End points are never extrema.

    Raises:
        TooShort: for fewer than three samples.
    """
    x = np.asarray(series, dtype=float)
    if x.size < 3:
        raise TooShort(f"need at least 3 samples to find extrema, got {x.size}")
    maxima, _ = find_peaks(x)
    minima, _ = find_peaks(-x)
    return maxima, minima


def _mirror(locs: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # indices into locs of the mirrored points, and their mirrored positions
    k = min(2, locs.size)
    left = np.arange(k)[::-1]
    right = np.arange(locs.size - k, locs.size)[::-1]
    order = np.concatenate([left, np.arange(locs.size), right])
    positions = np.concatenate([-locs[left], locs, 2 * (n - 1) - locs[right]])
    return order, positions


def _envelope(x: np.ndarray, locs: np.ndarray) -> np.ndarray:
    order, positions = _mirror(locs, x.size)
    spline = CubicSpline(positions, x[locs][order], bc_type="natural")
    return spline(np.arange(x.size))


def _envelope_mean(x: np.ndarray, maxima: np.ndarray, minima: np.ndarray) -> np.ndarray:
    return 0.5 * (_envelope(x, maxima) + _envelope(x, minima))


def envelope_mean(series) -> np.ndarray:
    """Pointwise mean of the natural cubic-spline envelopes through the maxima and minima.

    The two extrema nearest each end are mirrored across that end before
    interpolating.

    Raises:
        InsufficientExtrema: if the series has no interior maximum or no interior minimum.
    """
    x = np.asarray(series, dtype=float)
    maxima, minima = find_extrema(x)
    if maxima.size == 0 or minima.size == 0:
        raise InsufficientExtrema(
            f"envelopes need maxima and minima, found {maxima.size} maxima and {minima.size} minima"
        )
    return _envelope_mean(x, maxima, minima)


def _is_imf(h: np.ndarray) -> bool:
    maxima, minima = find_extrema(h)
    return abs(maxima.size + minima.size - zero_crossings(h)) <= 1


def _sift_one(remainder: np.ndarray, config: SiftConfig) -> tuple[np.ndarray, int]:
    h = remainder.copy()
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        maxima, minima = find_extrema(h)
        if maxima.size == 0 or minima.size == 0:
            break
        mean = _envelope_mean(h, maxima, minima)
        energy = np.sum(h**2)
        sd = np.sum(mean**2) / energy if energy > 0 else 0.0
        h = h - mean
        if sd < config.sd_threshold and _is_imf(h):
            break
    return h, iteration


def sift(series, config: SiftConfig = SiftConfig()) -> ImfSet:
    """Decompose a series into intrinsic mode functions and a residue.

    IMFs are extracted fastest first. Sifting of one IMF stops once the
    standard-deviation criterion falls below ``config.sd_threshold`` and the
    extrema and zero-crossing counts differ by at most one, or after
    ``config.max_iterations`` passes. Extraction stops when the remainder has
    fewer than three extrema, is negligible, or the IMF cap is reached.

    Raises:
        TooShort: for fewer than 8 samples.
        ConstantSeries: for a constant input.
    """
    x = np.asarray(series, dtype=float)
    if x.size < 8:
        raise TooShort(f"need at least 8 samples to sift, got {x.size}")
    span = np.ptp(x)
    if span == 0:
        raise ConstantSeries("cannot decompose a constant series")

    cap = config.max_imfs or int(math.ceil(math.log2(x.size))) + 1
    floor = config.residue_floor * span
    remainder = x.copy()
    imfs = []
    while len(imfs) < cap:
        if np.ptp(remainder) <= floor:
            break
        maxima, minima = find_extrema(remainder)
        if maxima.size + minima.size < 3:
            break
        h, iterations = _sift_one(remainder, config)
        logger.debug("IMF %d extracted after %d sifting passes", len(imfs) + 1, iterations)
        imfs.append(Imf(index=len(imfs) + 1, values=h))
        remainder = remainder - h

    logger.debug("Sifted %d samples into %d IMFs", x.size, len(imfs))
    return ImfSet(imfs=tuple(imfs), residue=remainder)

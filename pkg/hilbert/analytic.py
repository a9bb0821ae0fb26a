import logging
from dataclasses import dataclass

import numpy as np
from scipy import signal as scipy_signal

from emd import find_extrema
from utils import consts
from utils.arrays import readonly
from utils.errors import NonOscillatory, TooShort

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalyticSignal:
    real: np.ndarray
    imag: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray

    def __len__(self) -> int:
        return len(self.real)


@dataclass(frozen=True)
class InstantaneousFrequency:
    """Per-sample frequency in cycles/day; ``valid`` is False where it is not positive."""

    omega: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True)
class TimeScale:
    tau: float
    omega: np.ndarray
    method: str = "frequency"


def _values(imf) -> np.ndarray:
    return np.asarray(getattr(imf, "values", imf), dtype=float)


def analytic_signal(imf) -> AnalyticSignal:
    """Analytic signal of an IMF through the frequency-domain Hilbert transform.

    Negative frequencies are zeroed and positive ones doubled, DC and Nyquist
    left as they are.

    Raises:
        TooShort: for fewer than 8 samples.
    """
    x = _values(imf)
    if x.size < 8:
        raise TooShort(f"need at least 8 samples for a Hilbert transform, got {x.size}")
    z = scipy_signal.hilbert(x)
    return AnalyticSignal(
        real=readonly(z.real),
        imag=readonly(z.imag),
        amplitude=readonly(np.abs(z)),
        phase=readonly(np.unwrap(np.angle(z))),
    )


def inst_frequency(sig: AnalyticSignal) -> InstantaneousFrequency:
    omega = np.gradient(sig.phase) / (2 * np.pi)
    valid = np.isfinite(omega) & (omega > 0)
    return InstantaneousFrequency(omega=readonly(omega), valid=readonly(valid, dtype=bool))


def count_timescale(imf) -> float:
    """Period as samples per local maximum."""
    x = _values(imf)
    maxima, _ = find_extrema(x)
    if maxima.size == 0:
        raise NonOscillatory("series has no local maximum")
    return x.size / maxima.size


def mean_timescale(imf, trim: float = consts.BOUNDARY_TRIM, method: str = "frequency") -> TimeScale:
    """Mean period of an IMF in trading days.

    With ``method="frequency"`` the period is the average of ``1/omega`` over
    samples with positive instantaneous frequency, leaving out ``trim`` of the
    samples at each end. ``method="count"`` divides the length by the number
    of local maxima.

    Raises:
        NonOscillatory: if the IMF has fewer than two maxima or no usable sample.
    """
    x = _values(imf)
    maxima, _ = find_extrema(x)
    if maxima.size < 2:
        raise NonOscillatory(f"need at least 2 maxima for a time scale, found {maxima.size}")

    freq = inst_frequency(analytic_signal(x))
    if method == "count":
        return TimeScale(tau=count_timescale(x), omega=freq.omega, method=method)
    if method != "frequency":
        raise ValueError(f"unknown time-scale method '{method}'")

    cut = int(np.floor(trim * x.size))
    keep = freq.valid.copy()
    keep[:cut] = False
    keep[x.size - cut :] = False
    if not np.any(keep):
        raise NonOscillatory("no interior sample has a positive instantaneous frequency")
    dropped = int(np.count_nonzero(~freq.valid[cut : x.size - cut]))
    if dropped:
        logger.debug("Excluded %d interior samples with non-positive frequency", dropped)
    return TimeScale(tau=float(np.mean(1.0 / freq.omega[keep])), omega=freq.omega, method=method)

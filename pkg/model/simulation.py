import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from utils.arrays import as_dates, readonly, strictly_increasing
from utils.errors import BlowupRisk, LengthMismatch, NonMonotoneDates, NonPositivePrice

from .regimes import RegimeSchedule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PriceSeries:
    values: np.ndarray
    dates: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "values", readonly(self.values))
        if np.any(~(self.values > 0)):
            bad = int(np.flatnonzero(~(self.values > 0))[0])
            raise NonPositivePrice(f"price at position {bad} is {self.values[bad]}, prices must be positive")
        if self.dates is not None:
            object.__setattr__(self, "dates", as_dates(self.dates))
            if len(self.dates) != len(self.values):
                raise LengthMismatch(f"{len(self.dates)} dates for {len(self.values)} prices")
            if not strictly_increasing(self.dates):
                raise NonMonotoneDates("price dates must be strictly increasing")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def terminal(self) -> float:
        return float(self.values[-1])


def simulate(
    p0: float,
    psi: Sequence[float],
    schedule: RegimeSchedule,
    phi: float,
    *,
    sentiment: bool = True,
    dates=None,
) -> PriceSeries:
    """Run the regime-driven price update over a normalized flow sequence.

    Shock steps move the price by ``lam * psi``; every other step by
    ``lam * psi * phi * theta``. With ``sentiment=False`` theta is taken as +1
    outside shocks, which is the flow-and-antifragility model without investor
    sentiment.

    Args:
        p0: Initial price, must be positive.
        psi: Normalized flow, one value per step.
        schedule: Regime segments covering exactly ``len(psi)`` steps.
        phi: Antifragility of the simulated stock or sector.
        sentiment: Apply the schedule's theta values.
        dates: Optional calendar for the ``len(psi) + 1`` output prices.

    Returns:
        The price path, ``p0`` included.

    Raises:
        LengthMismatch: if the schedule does not cover ``psi``.
        BlowupRisk: if some step satisfies ``lam * |psi| * max(1, |phi|) >= 1``.
    """
    if not p0 > 0:
        raise NonPositivePrice(f"initial price must be positive, got {p0}")
    psi = np.asarray(psi, dtype=float)
    if schedule.total_length != psi.size:
        raise LengthMismatch(f"schedule covers {schedule.total_length} steps but the flow has {psi.size}")

    lam = schedule.step_lambdas()
    shock = schedule.shock_mask()
    theta = schedule.step_thetas() if sentiment else np.ones(psi.size, dtype=int)

    risk = lam * np.abs(psi) * max(1.0, abs(phi))
    if np.any(risk >= 1):
        step = int(np.argmax(risk >= 1))
        logger.warning(
            "Step %d: lambda=%.3f psi=%.3f phi=%.3f gives step magnitude %.3f",
            step,
            lam[step],
            psi[step],
            phi,
            risk[step],
        )
        raise BlowupRisk(f"step {step} could drive the price non-positive (magnitude {risk[step]:.3f} >= 1)")

    gain = np.where(shock, 1.0, phi * theta)
    factors = 1.0 + lam * psi * gain
    values = p0 * np.concatenate(([1.0], np.cumprod(factors)))
    return PriceSeries(values=values, dates=dates)

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from utils.arrays import as_dates, readonly, strictly_increasing
from utils.errors import (
    AllZeroFlow,
    EmptySeries,
    LengthMismatch,
    NonMonotoneDates,
    NonPositiveExpenses,
)

logger = logging.getLogger(__name__)


def normalize_flow(raw: Sequence[float]) -> np.ndarray:
    """Scale net fund-flow by its largest absolute value over the whole sample.

    Args:
        raw: Net fund-flow values, one per trading day.

    Returns:
        Normalized flow with values in [-1, 1]; the largest magnitude is exactly 1.

    Raises:
        EmptySeries: if ``raw`` is empty.
        AllZeroFlow: if every value is zero.
    """
    values = np.asarray(raw, dtype=float)
    if values.size == 0:
        raise EmptySeries("cannot normalize an empty flow series")
    peak = np.max(np.abs(values))
    if peak == 0:
        raise AllZeroFlow("every fund-flow value is zero, normalization is undefined")
    return values / peak


@dataclass(frozen=True)
class FlowSeries:
    dates: np.ndarray
    raw: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", as_dates(self.dates))
        object.__setattr__(self, "raw", readonly(self.raw))
        object.__setattr__(self, "psi", readonly(self.psi))
        if not (len(self.dates) == len(self.raw) == len(self.psi)):
            raise LengthMismatch(
                f"flow series columns differ in length: {len(self.dates)} dates, "
                f"{len(self.raw)} raw, {len(self.psi)} normalized"
            )
        if not strictly_increasing(self.dates):
            raise NonMonotoneDates("flow dates must be strictly increasing")

    @classmethod
    def from_raw(cls, dates, raw) -> "FlowSeries":
        return cls(dates=dates, raw=raw, psi=normalize_flow(raw))

    def __len__(self) -> int:
        return len(self.psi)

    def select(self, mask: np.ndarray) -> "FlowSeries":
        """Keep the rows under ``mask``; the normalization of the full sample is preserved."""
        return FlowSeries(dates=self.dates[mask], raw=self.raw[mask], psi=self.psi[mask])


@dataclass(frozen=True)
class CompanyFinancials:
    current_assets: float
    current_liabilities: float
    operating_expenses: float
    company: str = ""


def antifragility(fin: CompanyFinancials) -> float:
    """Net working capital in units of operating expenses."""
    if not fin.operating_expenses > 0:
        raise NonPositiveExpenses(
            f"operating expenses must be positive, got {fin.operating_expenses}"
            + (f" for '{fin.company}'" if fin.company else "")
        )
    phi = (fin.current_assets - fin.current_liabilities) / fin.operating_expenses
    if not -2 < phi < 2:
        logger.debug("antifragility %.3f outside the usual (-2, 2) range", phi)
    return float(phi)


def sector_antifragility(phis: Sequence[float]) -> float:
    if len(phis) == 0:
        raise EmptySeries("sector antifragility needs at least one company")
    return float(np.mean(np.asarray(phis, dtype=float)))

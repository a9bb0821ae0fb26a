from dataclasses import dataclass
from enum import Enum

import numpy as np

from utils import consts
from utils.errors import LengthMismatch, NoShockSegment

from .regimes import RegimeKind, RegimeSchedule
from .simulation import PriceSeries


class RecoveryShape(str, Enum):
    V = "V"
    U = "U"
    SWOOSH = "Swoosh"
    L = "L"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ShapeThresholds:
    """Heuristic cut-offs for naming a recovery.

    ``trough_fraction`` is the share of the log drawdown that still counts as
    sitting at the trough.
    """

    trough_fraction: float = consts.TROUGH_FRACTION
    u_dwell: int = consts.U_DWELL_DAYS
    swoosh_horizon_factor: float = consts.SWOOSH_HORIZON_FACTOR
    l_recovered_fraction: float = consts.L_RECOVERED_FRACTION
    u_recovery_level: float = consts.U_RECOVERY_LEVEL


def trough_dwell(log_values: np.ndarray, trough: int, band: float) -> int:
    """Length of the contiguous run around ``trough`` that stays within ``band`` of it."""
    inside = log_values <= log_values[trough] + band
    left = trough
    while left > 0 and inside[left - 1]:
        left -= 1
    right = trough
    while right < inside.size - 1 and inside[right + 1]:
        right += 1
    return right - left + 1


def classify_recovery(
    path: PriceSeries,
    schedule: RegimeSchedule,
    thresholds: ShapeThresholds = ShapeThresholds(),
) -> RecoveryShape:
    """Name the shape of the recovery that follows the first shock.

    The pre-shock level is the price when the shock starts; the trough is the
    lowest price from there on. Depth and dwell are measured on log prices.
    """
    shock_start = schedule.start_of(RegimeKind.SHOCK)
    if shock_start is None:
        raise NoShockSegment("the schedule has no shock segment to recover from")
    if len(path) != schedule.total_length + 1:
        raise LengthMismatch(f"path has {len(path)} prices, schedule expects {schedule.total_length + 1}")

    tail = path.values[shock_start:]
    pre = tail[0]
    trough = int(np.argmin(tail))
    low = tail[trough]
    if low >= pre:
        return RecoveryShape.UNDETERMINED

    log_tail = np.log(tail)
    depth = log_tail[0] - log_tail[trough]
    dwell = trough_dwell(log_tail, trough, thresholds.trough_fraction * depth)

    after = tail[trough:]
    halfway = pre - thresholds.l_recovered_fraction * (pre - low)
    if not np.any(after >= halfway):
        return RecoveryShape.L

    hits = np.flatnonzero(after >= thresholds.u_recovery_level * pre)
    reached = hits.size > 0
    horizon = int(hits[0]) if reached else after.size
    slow = horizon >= thresholds.swoosh_horizon_factor * schedule.length_of(RegimeKind.SHOCK)

    if dwell >= thresholds.u_dwell:
        return RecoveryShape.U if reached else RecoveryShape.SWOOSH
    if slow:
        return RecoveryShape.SWOOSH
    if reached:
        return RecoveryShape.V
    return RecoveryShape.UNDETERMINED

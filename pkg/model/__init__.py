from .flows import (
    CompanyFinancials,
    FlowSeries,
    antifragility,
    normalize_flow,
    sector_antifragility,
)
from .regimes import RegimeKind, RegimeSchedule, RegimeSegment
from .shapes import RecoveryShape, ShapeThresholds, classify_recovery
from .simulation import PriceSeries, simulate

__all__ = [
    "CompanyFinancials",
    "FlowSeries",
    "PriceSeries",
    "RecoveryShape",
    "RegimeKind",
    "RegimeSchedule",
    "RegimeSegment",
    "ShapeThresholds",
    "antifragility",
    "classify_recovery",
    "normalize_flow",
    "sector_antifragility",
    "simulate",
]

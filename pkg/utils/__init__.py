from . import consts
from .errors import (
    AllZeroFlow,
    BlowupRisk,
    ConfigError,
    ConstantInput,
    ConstantSeries,
    DegenerateCorrelation,
    EmptySchedule,
    EmptySeries,
    InsufficientExtrema,
    InvalidGrid,
    LengthMismatch,
    MissingFixture,
    NoMaxima,
    NonMonotoneDates,
    NonOscillatory,
    NonPositiveExpenses,
    NonPositivePrice,
    NoShockSegment,
    NoSignificantImf,
    ParseError,
    RecoveryLabError,
    RenderError,
    StageError,
    TooShort,
    stage,
)

__all__ = [
    "consts",
    "stage",
    "RecoveryLabError",
    "StageError",
    "RenderError",
    "AllZeroFlow",
    "BlowupRisk",
    "ConfigError",
    "ConstantInput",
    "ConstantSeries",
    "DegenerateCorrelation",
    "EmptySchedule",
    "EmptySeries",
    "InsufficientExtrema",
    "InvalidGrid",
    "LengthMismatch",
    "MissingFixture",
    "NoMaxima",
    "NonMonotoneDates",
    "NonOscillatory",
    "NonPositiveExpenses",
    "NonPositivePrice",
    "NoShockSegment",
    "NoSignificantImf",
    "ParseError",
    "TooShort",
]

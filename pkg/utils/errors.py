import contextlib


class RecoveryLabError(ValueError):
    """Base class for every error raised by the toolkit."""


class EmptySeries(RecoveryLabError):
    pass


class AllZeroFlow(RecoveryLabError):
    pass


class NonPositiveExpenses(RecoveryLabError):
    pass


class LengthMismatch(RecoveryLabError):
    pass


class BlowupRisk(RecoveryLabError):
    """A step could drive the price to zero or below."""


class NoShockSegment(RecoveryLabError):
    pass


class EmptySchedule(RecoveryLabError):
    pass


class InvalidGrid(RecoveryLabError):
    pass


class TooShort(RecoveryLabError):
    pass


class ConstantSeries(RecoveryLabError):
    pass


class InsufficientExtrema(RecoveryLabError):
    pass


class NonOscillatory(RecoveryLabError):
    pass


class NoMaxima(RecoveryLabError):
    pass


class ConstantInput(RecoveryLabError):
    pass


class DegenerateCorrelation(RecoveryLabError):
    pass


class NoSignificantImf(RecoveryLabError):
    pass


class ParseError(RecoveryLabError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class NonMonotoneDates(RecoveryLabError):
    pass


class NonPositivePrice(RecoveryLabError):
    pass


class MissingFixture(RecoveryLabError):
    pass


class ConfigError(RecoveryLabError):
    pass


class RenderError(RecoveryLabError):
    pass


class StageError(RecoveryLabError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@contextlib.contextmanager
def stage(name: str):
    """Tag any toolkit error raised in the block with the stage name."""
    try:
        yield
    except StageError:
        raise
    except RecoveryLabError as e:
        raise StageError(name, e) from e

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional

import numpy as np

from utils.errors import ConfigError


class RegimeKind(str, Enum):
    NORMAL = "normal"
    SHOCK = "shock"
    NEGATIVE_SENTIMENT = "negative_sentiment"
    RECOVERY = "recovery"
    POST_RECOVERY = "post_recovery"

    @property
    def default_theta(self) -> int:
        return -1 if self is RegimeKind.NEGATIVE_SENTIMENT else 1


@dataclass(frozen=True)
class RegimeSegment:
    """A run of trading days sharing one update rule.

    ``theta`` defaults from ``kind``; it is ignored inside shock segments.
    """

    kind: RegimeKind
    length: int
    lam: float
    theta: Optional[int] = None

    def __post_init__(self):
        try:
            kind = RegimeKind(self.kind)
        except ValueError as e:
            raise ConfigError(f"unknown regime kind '{self.kind}'") from e
        object.__setattr__(self, "kind", kind)
        if int(self.length) != self.length or self.length < 0:
            raise ConfigError(f"{kind.value} segment length must be a non-negative integer, got {self.length}")
        object.__setattr__(self, "length", int(self.length))
        if not 0 < self.lam <= 1:
            raise ConfigError(f"{kind.value} segment lambda must be in (0, 1], got {self.lam}")
        theta = kind.default_theta if self.theta is None else self.theta
        if theta not in (-1, 0, 1):
            raise ConfigError(f"{kind.value} segment theta must be -1, 0 or +1, got {theta}")
        object.__setattr__(self, "theta", int(theta))


@dataclass(frozen=True)
class RegimeSchedule:
    segments: tuple[RegimeSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_length(self) -> int:
        return sum(s.length for s in self.segments)

    def bounds(self) -> Iterator[tuple[RegimeSegment, int, int]]:
        """Yield ``(segment, start, end)`` step offsets, ``end`` exclusive."""
        start = 0
        for segment in self.segments:
            yield segment, start, start + segment.length
            start += segment.length

    def start_of(self, kind: RegimeKind) -> Optional[int]:
        for segment, start, _ in self.bounds():
            if segment.kind is kind and segment.length > 0:
                return start
        return None

    def end_of(self, kind: RegimeKind) -> Optional[int]:
        end = None
        for segment, _, stop in self.bounds():
            if segment.kind is kind and segment.length > 0:
                end = stop
        return end

    def length_of(self, kind: RegimeKind) -> int:
        return sum(s.length for s in self.segments if s.kind is kind)

    def _per_step(self, attr: str, dtype) -> np.ndarray:
        return np.concatenate(
            [np.full(s.length, getattr(s, attr), dtype=dtype) for s in self.segments]
            or [np.empty(0, dtype=dtype)]
        )

    def step_lambdas(self) -> np.ndarray:
        return self._per_step("lam", float)

    def step_thetas(self) -> np.ndarray:
        return self._per_step("theta", int)

    def shock_mask(self) -> np.ndarray:
        return np.concatenate(
            [np.full(s.length, s.kind is RegimeKind.SHOCK) for s in self.segments]
            or [np.empty(0, dtype=bool)]
        )

    def mask_of(self, kind: RegimeKind) -> np.ndarray:
        return np.concatenate(
            [np.full(s.length, s.kind is kind) for s in self.segments] or [np.empty(0, dtype=bool)]
        )

import hashlib
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from model import RegimeKind
from utils import consts
from utils.errors import ConfigError, EmptySchedule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegimeFlowSpec:
    """Gaussian law of the normalized flow inside one regime; ``sigma`` is a standard deviation."""

    kind: RegimeKind
    mu: float
    sigma: float
    length: int

    def __post_init__(self):
        object.__setattr__(self, "kind", RegimeKind(self.kind))
        if not self.sigma > 0:
            raise ConfigError(f"{self.kind.value} flow sigma must be positive, got {self.sigma}")
        if int(self.length) != self.length or self.length < 0:
            raise ConfigError(f"{self.kind.value} flow length must be a non-negative integer, got {self.length}")
        object.__setattr__(self, "length", int(self.length))

    @classmethod
    def default(cls, kind: RegimeKind, length: int) -> "RegimeFlowSpec":
        mu, sigma, _ = consts.REGIME_FLOW_DEFAULTS[RegimeKind(kind).value]
        return cls(kind=kind, mu=mu, sigma=sigma, length=length)


def spec_stream(seed: int, specs: Iterable[RegimeFlowSpec]) -> np.random.SeedSequence:
    """Derive an RNG stream from the base seed and a stable encoding of the flow specs.

    Experiments that share the flow specs share the draws, whatever their
    antifragility or lambda.
    """
    encoding = "|".join(f"{s.kind.value}:{s.mu!r}:{s.sigma!r}:{s.length}" for s in specs)
    digest = hashlib.sha256(encoding.encode("utf-8")).digest()
    return np.random.SeedSequence([int(seed), int.from_bytes(digest[:16], "big")])


def gen_flow(
    specs: Sequence[RegimeFlowSpec],
    seed: Union[int, np.random.SeedSequence],
) -> np.ndarray:
    """Draw synthetic normalized flow, segment by segment, clipped to [-1, 1].

    Args:
        specs: Regime flow laws in schedule order.
        seed: Integer seed or seed sequence; equal seeds give equal draws.

    Returns:
        One value per trading day, ``sum(spec.length)`` in total.

    Raises:
        EmptySchedule: if no spec has a positive length.
    """
    specs = tuple(specs)
    if not any(s.length > 0 for s in specs):
        raise EmptySchedule("no regime with a positive length to draw flow for")
    rng = np.random.default_rng(seed)
    draws = np.concatenate([rng.normal(s.mu, s.sigma, s.length) for s in specs])
    clipped = np.abs(draws) > 1
    if np.any(clipped):
        logger.debug("Clipped %d of %d synthetic flow draws", int(clipped.sum()), draws.size)
    return np.clip(draws, -1.0, 1.0)

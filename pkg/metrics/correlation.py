import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from emd import ImfSet
from hilbert import count_timescale, mean_timescale
from sst import SstReport
from utils import consts
from utils.errors import (
    ConstantInput,
    DegenerateCorrelation,
    LengthMismatch,
    NonOscillatory,
    NoSignificantImf,
    TooShort,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PValue:
    p: float
    log10_p: float
    degenerate: bool = False

    @property
    def formatted(self) -> str:
        if self.p < consts.P_VALUE_FLOOR:
            return f"< {consts.P_VALUE_FLOOR:.0e}"
        return f"{self.p:.3g}"


@dataclass(frozen=True)
class CorrelationResult:
    nu: float
    p: float
    n: int
    log10_p: float
    degenerate: bool = False

    @property
    def p_formatted(self) -> str:
        return PValue(self.p, self.log10_p, self.degenerate).formatted


def _values(series) -> np.ndarray:
    return np.asarray(getattr(series, "values", series), dtype=float)


def pearson(a, b) -> float:
    x, y = _values(a), _values(b)
    if x.size != y.size:
        raise LengthMismatch(f"cannot correlate series of lengths {x.size} and {y.size}")
    if x.size < 3:
        raise TooShort(f"need at least 3 paired samples, got {x.size}")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ConstantInput("correlation with a constant series is undefined")
    dx = x - x.mean()
    dy = y - y.mean()
    nu = np.sum(dx * dy) / math.sqrt(np.sum(dx**2) * np.sum(dy**2))
    return float(np.clip(nu, -1.0, 1.0))


def _log_beta_tail(a: float, b: float, x: float) -> float:
    # ln I_x(a, b) = a ln x + b ln(1 - x) - ln a - ln B(a, b) + ln 2F1(a + b, 1; a + 1; x)
    return (
        a * math.log(x)
        + b * math.log1p(-x)
        - math.log(a)
        - special.betaln(a, b)
        + math.log(special.hyp2f1(a + b, 1.0, a + 1.0, x))
    )


def p_value(nu: float, n: int, strict: bool = False) -> PValue:
    """Two-sided p-value of a Pearson coefficient under the t-test with n - 2 degrees of freedom.

    The t tail is the regularized incomplete beta ``I_x(df/2, 1/2)`` with
    ``x = df / (df + t**2)``; when that underflows it is evaluated in log space.

    Args:
        nu: Correlation coefficient.
        n: Number of paired samples, at least 3.
        strict: Raise on a perfect correlation instead of returning p = 0.

    Raises:
        DegenerateCorrelation: for |nu| = 1 when ``strict`` is set.
    """
    if n < 3:
        raise TooShort(f"need at least 3 paired samples, got {n}")
    if abs(nu) >= 1:
        if strict:
            raise DegenerateCorrelation(f"|nu| = 1 with n = {n}, the t statistic is infinite")
        logger.warning("Perfect correlation over %d samples, reporting p = 0", n)
        return PValue(p=0.0, log10_p=-math.inf, degenerate=True)

    df = n - 2
    t2 = nu * nu * df / (1 - nu * nu)
    x = df / (df + t2)
    p = float(special.betainc(df / 2, 0.5, x))
    if p >= consts.P_VALUE_FLOOR:
        return PValue(p=p, log10_p=math.log10(p) if p > 0 else -math.inf)
    log10_p = _log_beta_tail(df / 2, 0.5, x) / math.log(10)
    return PValue(p=p, log10_p=log10_p)


def correlate(a, b) -> CorrelationResult:
    nu = pearson(a, b)
    n = _values(a).size
    pv = p_value(nu, n)
    return CorrelationResult(nu=nu, p=pv.p, n=n, log10_p=pv.log10_p, degenerate=pv.degenerate)


def imf_correlations(original, imfset: ImfSet) -> list[CorrelationResult]:
    return [correlate(imf.values, original) for imf in imfset.imfs]


@dataclass(frozen=True)
class DominantImf:
    index: int
    correlation: CorrelationResult


def _tau(imfset: ImfSet, index: int) -> float:
    try:
        return mean_timescale(imfset[index]).tau
    except NonOscillatory:
        return count_timescale(imfset[index])


def dominant_imf(original, imfset: ImfSet, sst: SstReport) -> DominantImf:
    """The significant IMF most correlated with the original series.

    Equal coefficients are resolved toward the longer time scale.

    Raises:
        NoSignificantImf: if the significance test kept no IMF.
    """
    candidates = sst.significant_indices()
    if not candidates:
        raise NoSignificantImf("no IMF lies above the white-noise spread line")
    results = {index: correlate(imfset[index].values, original) for index in candidates}
    best = max(r.nu for r in results.values())
    tied = [index for index, r in results.items() if math.isclose(r.nu, best, rel_tol=0, abs_tol=1e-12)]
    index = tied[0] if len(tied) == 1 else max(tied, key=lambda i: _tau(imfset, i))
    return DominantImf(index=index, correlation=results[index])

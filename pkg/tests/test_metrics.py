import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special
from scipy.stats import norm

from emd import Imf, ImfSet
from metrics import correlate, dominant_imf, imf_correlations, p_value, pearson
from metrics.correlation import _log_beta_tail
from sst import ImfStat, SstReport, assess_series
from utils.errors import ConstantInput, DegenerateCorrelation, LengthMismatch, NoSignificantImf, TooShort

from .conftest import tone


def normal_scores(n: int) -> np.ndarray:
    return norm.ppf((np.arange(n) + 0.5) / n)


def permutation_p(x: np.ndarray, y: np.ndarray) -> float:
    observed = abs(pearson(x, y))
    hits = total = 0
    for perm in itertools.permutations(y):
        total += 1
        hits += abs(pearson(x, perm)) >= observed - 1e-12
    return hits / total


def report_for(*flags: bool) -> SstReport:
    stats = tuple(ImfStat(n=i + 1, energy=1.0, period=2.0 ** (i + 1)) for i in range(len(flags)))
    empty = np.zeros(2)
    return SstReport(
        stats=stats, confidence=0.99, k=2.326, n_samples=100, spread=(empty, empty, empty), significant=flags
    )


def test_pearson_examples():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    assert pearson(a, a) == pytest.approx(1.0)
    assert pearson(a, -a) == pytest.approx(-1.0)
    assert pearson(a, [1, 2, 3, 5]) == pytest.approx(6.5 / math.sqrt(43.75))


def test_pearson_errors():
    with pytest.raises(LengthMismatch):
        pearson([1, 2, 3], [1, 2])
    with pytest.raises(TooShort):
        pearson([1, 2], [2, 1])
    with pytest.raises(ConstantInput):
        pearson([1, 1, 1], [1, 2, 3])


@given(
    st.integers(min_value=0, max_value=1000),
    st.floats(min_value=1e-3, max_value=1e3),
    st.floats(min_value=-1e3, max_value=1e3),
)
def test_pearson_affine_invariance(seed, scale, offset):
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(30), rng.standard_normal(30)
    nu = pearson(x, y)
    assert pearson(scale * x + offset, y) == pytest.approx(nu, abs=1e-9)
    assert pearson(-x, y) == pytest.approx(-nu, abs=1e-12)


def test_p_value_at_zero():
    for n in (3, 10, 500):
        assert p_value(0.0, n).p == pytest.approx(1.0)


@pytest.mark.parametrize(
    "order",
    [
        [1, 0, 2, 3, 5, 4, 6, 7],
        [2, 0, 5, 1, 3, 7, 4, 6],
        [0, 3, 1, 2, 6, 4, 5],
        [3, 0, 4, 6, 1, 2, 5],
    ],
)
def test_p_value_matches_permutation_test(order):
    x = normal_scores(len(order))
    y = x[order]
    assert p_value(pearson(x, y), len(order)).p == pytest.approx(permutation_p(x, y), abs=0.02)


@given(
    st.floats(min_value=0.01, max_value=0.99),
    st.floats(min_value=0.01, max_value=0.99),
    st.integers(min_value=3, max_value=200),
)
def test_p_value_decreases_with_strength(a, b, n):
    weak, strong = sorted((a, b))
    assert p_value(strong, n).log10_p <= p_value(weak, n).log10_p
    assert p_value(-strong, n).p == p_value(strong, n).p


@given(st.floats(min_value=0.05, max_value=0.99), st.integers(min_value=3, max_value=200))
def test_p_value_decreases_with_samples(nu, n):
    assert p_value(nu, n + 1).log10_p <= p_value(nu, n).log10_p


def test_log_space_tail_matches_direct_value():
    for a, x in [(24.0, 0.2), (5.0, 0.01), (100.0, 0.5)]:
        direct = math.log(special.betainc(a, 0.5, x))
        assert _log_beta_tail(a, 0.5, x) == pytest.approx(direct, rel=1e-9)


def test_tiny_p_values_stay_finite_in_log_space():
    result = p_value(0.999, 2000)
    assert result.p < 1e-300
    assert math.isfinite(result.log10_p)
    assert result.log10_p < -300
    assert result.formatted == "< 1e-300"
    assert p_value(0.3, 30).formatted == f"{p_value(0.3, 30).p:.3g}"


def test_degenerate_correlation():
    result = p_value(1.0, 10)
    assert result.p == 0.0
    assert result.degenerate
    with pytest.raises(DegenerateCorrelation):
        p_value(-1.0, 10, strict=True)
    with pytest.raises(TooShort):
        p_value(0.5, 2)


def test_correlate_flags_perfect_fit():
    a = np.arange(10.0)
    result = correlate(a, 2 * a + 1)
    assert result.nu == pytest.approx(1.0)
    assert result.degenerate or result.p < 1e-12
    assert result.n == 10


def test_imf_correlations():
    imfset = ImfSet(imfs=(Imf(1, tone(16, 512)), Imf(2, tone(64, 512))), residue=np.zeros(512))
    results = imf_correlations(tone(64, 512) + 0.1 * tone(16, 512), imfset)
    assert len(results) == 2
    assert results[1].nu > results[0].nu


def test_dominant_tone_imf():
    noise = np.random.default_rng(5).standard_normal(1024)
    original = 5 * tone(64, 1024) + 0.5 * noise
    imfset, report = assess_series(original)
    dominant = dominant_imf(original, imfset, report)
    assert abs(np.corrcoef(imfset[dominant.index].values, tone(64, 1024))[0, 1]) > 0.9
    assert dominant_imf(3 * original + 7, imfset, report).index == dominant.index


def test_dominant_ties_go_to_longer_time_scale():
    imfset = ImfSet(imfs=(Imf(1, tone(16, 1024)), Imf(2, tone(64, 1024))), residue=np.zeros(1024))
    original = tone(16, 1024) + tone(64, 1024)
    assert dominant_imf(original, imfset, report_for(True, True)).index == 2


def test_dominant_only_considers_significant_imfs():
    imfset = ImfSet(imfs=(Imf(1, tone(16, 512)), Imf(2, tone(64, 512))), residue=np.zeros(512))
    original = tone(16, 512) + 0.2 * tone(64, 512)
    assert dominant_imf(original, imfset, report_for(False, True)).index == 2
    with pytest.raises(NoSignificantImf):
        dominant_imf(original, imfset, report_for(False, False))

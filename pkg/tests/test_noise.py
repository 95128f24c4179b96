from fractions import Fraction
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import norm

from e8frodo.noise import (
    TOTAL,
    ChiTable,
    InfiniteDivergence,
    build_chi,
    chi_as_mapping,
    chi_divergence,
    renyi_divergence,
    rounded_gaussian_pmf,
    sample,
    sample_matrix,
    support_radius,
)

SIGMAS = [1.14, 1.15, 1.4, 1.68, 1.8, 2.3, 2.75, 2.8, 3.9]


def test_pmf_at_zero():
    expected = math.erf(0.5 / math.sqrt(2))
    assert float(rounded_gaussian_pmf(1, 0)) == pytest.approx(expected, rel=1e-15)
    assert str(rounded_gaussian_pmf(1, 0)).startswith("0.3829249")


def test_pmf_matches_quadrature():
    with mpmath.workdps(40):
        quad = mpmath.quad(lambda x: mpmath.npdf(x, 0, 1.7), [2.5, 3.5])
        assert abs(rounded_gaussian_pmf(1.7, 3) - quad) < mpmath.mpf(10) ** -30


def test_pmf_total_mass():
    total = sum(rounded_gaussian_pmf(1, i) for i in range(-10, 11))
    assert abs(total - 1) < mpmath.mpf(10) ** -20


@given(st.floats(0.5, 30), st.integers(0, 60))
def test_pmf_symmetric(sigma, i):
    assert rounded_gaussian_pmf(sigma, i) == rounded_gaussian_pmf(sigma, -i)


def test_pmf_rejects_bad_sigma():
    with pytest.raises(ValueError):
        rounded_gaussian_pmf(0, 1)
    with pytest.raises(ValueError):
        build_chi(-1.0)


@pytest.mark.parametrize("sigma", SIGMAS + [25.0])
def test_support_radius(sigma):
    s = support_radius(sigma)
    limit = 2.0**-17
    assert norm.sf((s + 0.5) / sigma) < limit
    assert norm.sf((s - 0.5) / sigma) >= limit


@pytest.mark.parametrize("sigma", SIGMAS)
def test_table_invariants(sigma):
    t = build_chi(sigma)
    assert sum(t.pmf16) == TOTAL
    assert t.is_symmetric()
    assert t.is_unimodal()
    assert t.cdf16[-1] == TOTAL


@pytest.mark.parametrize("sigma", SIGMAS)
def test_table_close_to_rounded_gaussian(sigma):
    t = build_chi(sigma)
    for i in range(-t.s, t.s + 1):
        assert abs(t.numerator(i) - float(rounded_gaussian_pmf(sigma, i)) * TOTAL) <= 2


def test_table_variance_close_to_sigma_squared():
    t = build_chi(2.8)
    assert t.variance() == pytest.approx(2.8**2 + 1 / 12, rel=0.01)


def test_too_small_sigma():
    with pytest.raises(ValueError):
        build_chi(0.05)


def test_text_round_trip():
    t = build_chi(1.4)
    text = t.to_text()
    assert text.splitlines()[0] == f"1.4 {t.s}"
    assert ChiTable.from_text(text) == t


def test_table_constructor_validates():
    with pytest.raises(ValueError):
        ChiTable(1.0, 1, (1, TOTAL - 2, 0))
    with pytest.raises(ValueError):
        ChiTable(1.0, 1, (1, 2))


@pytest.mark.parametrize("sigma", SIGMAS[:4] + [2.8])
def test_sampler_preserves_measure_exhaustively(sigma):
    t = build_chi(sigma)
    counts = {}
    for r in range(1 << 17):
        z = sample(t, r)
        counts[z] = counts.get(z, 0) + 1
    assert counts == {i: 2 * t.numerator(i) for i in range(-t.s, t.s + 1) if t.numerator(i)}


def test_batch_sampler_preserves_measure(backend):
    from e8frodo import _backend

    t = build_chi(2.3)
    r = np.arange(1 << 17, dtype=np.uint32)
    out = np.asarray(_backend.get(backend).sample_chi_batch(r, t.thresholds()))
    vals, counts = np.unique(out, return_counts=True)
    assert dict(zip(vals.tolist(), counts.tolist())) == {
        i: 2 * t.numerator(i) for i in range(-t.s, t.s + 1) if t.numerator(i)
    }


def test_sample_zero_randomness():
    for sigma in SIGMAS:
        assert sample(build_chi(sigma), 0) == 0


@given(st.integers(0, (1 << 17) - 1), st.sampled_from(SIGMAS))
def test_sample_in_support(r, sigma):
    t = build_chi(sigma)
    assert -t.s <= sample(t, r) <= t.s


def test_point_mass_sampler():
    t = ChiTable.point_mass()
    assert all(sample(t, r) == 0 for r in (0, 1, 12345, (1 << 17) - 1))
    assert not sample_matrix(t, (4, 4), np.random.default_rng(0)).any()


@pytest.mark.slow
def test_empirical_frequencies(backend):
    t = build_chi(2.8)
    n = 10**7
    out = sample_matrix(t, (n,), np.random.default_rng(9), backend=backend)
    vals, counts = np.unique(out, return_counts=True)
    got = dict(zip(vals.tolist(), counts.tolist()))
    for i in range(-t.s, t.s + 1):
        p = t.numerator(i) / TOTAL
        sd = math.sqrt(n * p * (1 - p))
        assert abs(got.get(i, 0) - n * p) <= 4 * sd + 1e-9


def test_renyi_two_point():
    P = {0: Fraction(1, 2), 1: Fraction(1, 2)}
    Q = {0: 0.25, 1: 0.75}.get
    assert float(renyi_divergence(P, Q, 2)) == pytest.approx(math.log(4 / 3), rel=1e-14)


def test_renyi_identical_is_zero():
    P = {0: Fraction(1, 3), 1: Fraction(1, 6), 2: Fraction(1, 2)}
    assert abs(renyi_divergence(P, lambda x: float(P[x]), 3.5)) < 1e-15


def test_renyi_infinite():
    with pytest.raises(InfiniteDivergence):
        renyi_divergence({0: 0.5, 1: 0.5}, {0: 1.0, 1: 0.0}.get, 2)


def test_renyi_rejects_alpha():
    with pytest.raises(ValueError):
        renyi_divergence({0: 1.0}, lambda x: 1.0, 1)


@settings(max_examples=100)
@given(
    st.lists(st.integers(1, 100), min_size=2, max_size=6),
    st.lists(st.integers(1, 100), min_size=6, max_size=6),
    st.floats(1.01, 50),
)
def test_renyi_nonnegative(p, q, alpha):
    P = {i: Fraction(v, sum(p)) for i, v in enumerate(p)}
    qt = sum(q[: len(p)])
    D = renyi_divergence(P, lambda x: Fraction(q[x], qt), alpha)
    assert D >= -1e-40
    if [Fraction(v, sum(p)) for v in p] == [Fraction(v, qt) for v in q[: len(p)]]:
        assert abs(D) < 1e-40


def _rounded_table(sigma, bits):
    total = 1 << bits
    s = support_radius(sigma)
    nums = {i: int(mpmath.nint(rounded_gaussian_pmf(sigma, i) * total)) for i in range(-s, s + 1)}
    norm_ = sum(nums.values())
    return {i: Fraction(v, norm_) for i, v in nums.items() if v}


def test_divergence_shrinks_with_precision():
    sigma = 2.8
    q = lambda x: rounded_gaussian_pmf(sigma, x)
    ds = [renyi_divergence(_rounded_table(sigma, b), q, 50) for b in (10, 16, 22)]
    assert ds[0] > ds[1] > ds[2] > 0


@pytest.mark.parametrize("sigma", [1.4, 2.8])
def test_table_divergence_finite(sigma):
    t = build_chi(sigma)
    d = chi_divergence(t, 100)
    assert 0 < d < 0.1
    assert sum(chi_as_mapping(t).values()) == 1

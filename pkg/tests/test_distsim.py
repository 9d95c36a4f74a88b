import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.special import erf

from conftest import random_instance
from qtsp.distsim import (
    GaussianFit,
    LengthDistribution,
    boltzmann_exact,
    boltzmann_sample,
    enumerate_lengths,
    gaussian_fit,
    h_function,
    histogram,
    histogram_csv,
    self_normalized_mean,
    sigma_ratio,
    sis_draws,
    sis_sample,
    tilted_center,
    to_h_coordinates,
    tv_distance,
)
from qtsp.errors import DegenerateFitError, DimensionError, OutOfRangeError, SizeLimitError
from qtsp.geometry import tour_length
from qtsp.permcode import decode, rank, unrank
from qtsp.wavesim import prepare_weighted

DIAG = 2 + 2 * math.sqrt(2)


def gauss_integral(a, b):
    """int_a^b e^{-t^2} dt via erf (oracle for the quadrature)."""
    return math.sqrt(math.pi) / 2 * (erf(b) - erf(a))


def tilted_ratio_closed_form(mu, sigma, log_alpha, lo, mid, hi):
    c = mu - log_alpha * sigma ** 2
    if lo > c:
        # right tail: survival functions keep full precision
        sf = lambda x: stats.norm.sf((x - c) / sigma)
        return (sf(lo) - sf(mid)) / (sf(lo) - sf(hi))
    cdf = lambda x: stats.norm.cdf((x - c) / sigma)
    return (cdf(mid) - cdf(lo)) / (cdf(hi) - cdf(lo))


def test_enumerate_lengths_corners(corners):
    d = enumerate_lengths(corners)
    assert len(d.lengths) == 24
    assert np.isclose(d.lengths, 4.0).sum() == 8
    assert np.isclose(d.lengths, DIAG).sum() == 16
    assert d.within_bounds()


def test_enumerate_lengths_triangle(triangle):
    d = enumerate_lengths(triangle)
    assert np.allclose(d.lengths, d.lengths[0])


@pytest.mark.parametrize("seed", range(5))
def test_enumerate_lengths_matches_decode(seed):
    inst = random_instance(5, seed)
    d = enumerate_lengths(inst)
    for r in range(120):
        assert d.lengths[r] == pytest.approx(tour_length(inst, decode(unrank(r, 5))), abs=1e-9)
    assert d.x_min >= 2 - 1e-9 and d.x_max <= 5 * math.sqrt(2) + 1e-9


def test_enumerate_lengths_limit():
    with pytest.raises(SizeLimitError):
        enumerate_lengths(random_instance(6, 0), limit=5)


def test_boltzmann_examples(corners, triangle):
    d = enumerate_lengths(corners)
    near_one = boltzmann_exact(d, 1 + 1e-12)
    np.testing.assert_allclose(near_one, 1 / 24, atol=1e-12)
    sharp = boltzmann_exact(d, math.exp(20))
    assert sharp[np.isclose(d.lengths, 4.0)].sum() >= 1 - 1e-6
    for alpha in (1.1, math.e, 1e9):
        np.testing.assert_allclose(boltzmann_exact(enumerate_lengths(triangle), alpha), 1 / 6,
                                   atol=1e-15)


@pytest.mark.parametrize("alpha", [1.01, math.e, math.exp(10)])
def test_boltzmann_normalized_and_length_only(alpha):
    d = enumerate_lengths(random_instance(6, 11))
    p = boltzmann_exact(d, alpha)
    assert p.sum() == pytest.approx(1, abs=1e-12)
    # equal lengths get equal probability, so relabeling tied codes leaves the table unchanged
    order = np.argsort(d.lengths, kind="stable")
    L, P = d.lengths[order], p[order]
    ties = np.isclose(L[1:], L[:-1], rtol=0, atol=0)
    np.testing.assert_array_equal(P[1:][ties], P[:-1][ties])


def test_boltzmann_sample_point_mass():
    table = np.zeros(24)
    table[rank((1, 2, 1, 3))] = 1.0
    rng = np.random.default_rng(3)
    assert all(boltzmann_sample(table, rng) == (1, 2, 1, 3) for _ in range(50))


def test_boltzmann_sample_uniform_n3():
    rng = np.random.default_rng(8)
    table = np.full(6, 1 / 6)
    counts = np.bincount([rank(boltzmann_sample(table, rng)) for _ in range(60000)], minlength=6)
    assert np.all(np.abs(counts - 10000) <= 500)


@pytest.mark.parametrize("n", [4, 5])
def test_boltzmann_sample_chi_square(n):
    d = enumerate_lengths(random_instance(n, 70 + n))
    table = boltzmann_exact(d, math.e)
    rng = np.random.default_rng(n)
    draws = [rank(boltzmann_sample(table, rng)) for _ in range(100_000)]
    counts = np.bincount(draws, minlength=len(table))
    _, pval = stats.chisquare(counts, table * len(draws))
    assert pval > 0.001


def test_sis_n3_constant_weight(triangle):
    rng = np.random.default_rng(0)
    weights = [sis_sample(triangle, math.e, rng)[1] for _ in range(50)]
    assert max(weights) == pytest.approx(min(weights), rel=1e-12)
    assert all(w > 0 for w in weights)


def test_sis_self_normalized_mean_matches_exact():
    inst = random_instance(6, 21)
    alpha = math.exp(4)
    d = enumerate_lengths(inst)
    exact = float(boltzmann_exact(d, alpha) @ d.lengths)
    _, lengths, log_w = sis_draws(inst, alpha, 100_000, np.random.default_rng(17))
    est, se = self_normalized_mean(lengths, log_w)
    assert abs(est - exact) <= 3 * se
    assert np.all(np.isfinite(log_w))


def test_sis_proposal_is_circuit_distribution():
    inst = random_instance(5, 5)
    alpha = math.exp(2)
    codes, _, _ = sis_draws(inst, alpha, 60_000, np.random.default_rng(2))
    ranks = [rank(tuple(int(a) for a in c)) for c in codes]
    counts = np.bincount(ranks, minlength=120)
    expected = prepare_weighted(inst, alpha).probabilities * len(ranks)
    _, pval = stats.chisquare(counts, expected)
    assert pval > 0.001


def test_gaussian_fit_examples(triangle):
    fit = gaussian_fit([2, 4])
    assert fit.mu == 3 and fit.sigma == pytest.approx(math.sqrt(2))
    draws = np.random.default_rng(0).normal(5, 1, 100_000)
    fit = gaussian_fit(draws)
    assert fit.mu == pytest.approx(5, rel=0.02) and fit.sigma == pytest.approx(1, rel=0.02)
    assert fit.sample_count == 100_000
    with pytest.raises(DegenerateFitError):
        gaussian_fit(enumerate_lengths(triangle).lengths)
    with pytest.raises(DegenerateFitError):
        gaussian_fit([1.0])


def test_sigma_ratio_discrete_corners(corners):
    d = enumerate_lengths(corners)
    a = math.e
    expected = 8 * a ** -4 / (8 * a ** -4 + 16 * a ** -DIAG)
    assert sigma_ratio(d, a, 0.1) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.5337685029139385)


def test_sigma_ratio_saturates(corners):
    d = enumerate_lengths(corners)
    assert sigma_ratio(d, math.e, 0.5) == 1.0
    fit = GaussianFit(mu=4.5, sigma=0.4, sample_count=24)
    assert sigma_ratio(fit, math.e, 0.5, x_min=4.0, x_max=DIAG) == 1.0


def test_sigma_ratio_flat_limit():
    fit = GaussianFit(mu=3.0, sigma=1e6, sample_count=10)
    eps, lo, hi = 0.2, 2.0, 5.0
    r = sigma_ratio(fit, 1 + 1e-12, eps, x_min=lo, x_max=hi)
    assert r == pytest.approx(eps * lo / (hi - lo), abs=1e-8)


@pytest.mark.parametrize("mu, sigma, log_alpha, eps", [
    (4.0, 0.5, 1.0, 0.1),
    (3.7, 0.23, 12.0, 0.05),
    (5.0, 1.0, 0.1, 0.3),
    (4.5, 0.3, 40.0, 0.02),
])
def test_sigma_ratio_gaussian_matches_closed_form(mu, sigma, log_alpha, eps):
    lo, hi = 3.0, 6.0
    fit = GaussianFit(mu=mu, sigma=sigma, sample_count=100)
    got = sigma_ratio(fit, math.exp(log_alpha), eps, x_min=lo, x_max=hi)
    want = tilted_ratio_closed_form(mu, sigma, log_alpha, lo, lo * (1 + eps), hi)
    assert got == pytest.approx(want, abs=1e-8)


def test_sigma_ratio_errors(corners):
    fit = GaussianFit(mu=4, sigma=1, sample_count=3)
    with pytest.raises(OutOfRangeError):
        sigma_ratio(fit, math.e, 0.1, x_min=5, x_max=5)
    with pytest.raises(OutOfRangeError):
        sigma_ratio(fit, math.e, 0.1)
    with pytest.raises(OutOfRangeError):
        sigma_ratio(enumerate_lengths(corners), math.e, 0.0)


def test_sigma_ratio_monotone_in_eps():
    d = enumerate_lengths(random_instance(6, 4))
    for mode in ("exact", "gaussian"):
        vals = [sigma_ratio(d, math.exp(3), e, mode=mode) for e in np.linspace(0.01, 1.0, 30)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(1.0)


def test_h_function_reference_value():
    want = gauss_integral(0, 0.1) / gauss_integral(0, 3)
    assert want == pytest.approx(0.11246, abs=1e-4)
    assert h_function(0, 0.1, 3) == pytest.approx(want, abs=1e-10)


@given(st.floats(-3, 3), st.floats(0.01, 4))
def test_h_equal_widths_is_one(x, a):
    assert h_function(x, a, a) == 1.0


@settings(max_examples=200)
@given(st.floats(-2.5, 2.5), st.floats(0.01, 2), st.floats(0.01, 3))
def test_h_properties(x, a, extra):
    b = a + extra
    h = h_function(x, a, b)
    assert 0 < h < 1
    assert h == pytest.approx(gauss_integral(x, x + a) / gauss_integral(x, x + b), rel=1e-8)
    assert h_function(x, min(a * 1.1, b), b) >= h - 1e-12


def test_h_far_tails_do_not_underflow():
    assert 0 < h_function(30.0, 0.1, 3.0) <= 1
    assert 0 < h_function(-30.0, 0.1, 3.0) <= 1


def test_h_errors():
    with pytest.raises(OutOfRangeError):
        h_function(0, 0, 1)
    with pytest.raises(OutOfRangeError):
        h_function(0, 2, 1)


def test_h_coordinates_agree_with_sigma_ratio():
    fit = GaussianFit(mu=4.2, sigma=0.35, sample_count=100)
    alpha, lo, hi, eps = math.exp(3.0), 3.5, 6.0, 0.1
    x, a, b = to_h_coordinates(fit, alpha, lo, hi, eps)
    assert h_function(x, a, b) == pytest.approx(
        sigma_ratio(fit, alpha, eps, x_min=lo, x_max=hi), abs=1e-8)
    assert tilted_center(fit, alpha) == pytest.approx(4.2 - 3.0 * 0.35 ** 2)


def test_tv_distance():
    assert tv_distance([0.5, 0.5], [0.5, 0.5]) == 0
    assert tv_distance([1, 0], [0, 1]) == 1
    assert tv_distance([0.5, 0.5], [0.75, 0.25]) == pytest.approx(0.25)
    with pytest.raises(DimensionError):
        tv_distance([1.0], [0.5, 0.5])


def test_length_distribution_shape_check():
    with pytest.raises(DimensionError):
        LengthDistribution(lengths=np.zeros(5), n=3)


def test_histogram(corners):
    rows = histogram(enumerate_lengths(corners), bins=4)
    assert sum(c for _, _, c in rows) == 24
    assert rows[0][2] == 8 and rows[-1][2] == 16
    assert histogram_csv(rows).splitlines()[0] == "bin_lo,bin_hi,count"

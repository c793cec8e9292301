import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_outage.specfun import BesselUnderflowWarning, bessel_i0, bessel_i1, bessel_k1, log_binomial, log_factorial

mpmath.mp.dps = 40


def i0_series_oracle(x):
    """sum (x/2)^{2k} / (k!)^2 in 40-digit arithmetic."""
    x = mpmath.mpf(x)
    q = (x / 2) ** 2
    term = mpmath.mpf(1)
    total = mpmath.mpf(1)
    k = 0
    while term > total * mpmath.mpf(10) ** -45:
        k += 1
        term *= q / (k * k)
        total += term
    return float(total)


def k1_quad_oracle(x):
    """K1(x) = int_0^inf exp(-x cosh t) cosh t dt.

    The integrand peaks within ~1/sqrt(x) of t = 0, so the breakpoints shrink
    with x; exp(-x) is factored out to keep the integrand O(1).
    """
    xf = float(x)
    x = mpmath.mpf(x)
    t_max = float(mpmath.acosh(max(800 / x, 2))) + 1
    step = min(1.0, 1.0 / math.sqrt(xf))
    pts = [mpmath.mpf(t) for t in np.arange(0.0, t_max + step, step)]
    body = mpmath.quad(lambda t: mpmath.exp(-x * (mpmath.cosh(t) - 1)) * mpmath.cosh(t), pts)
    return float(mpmath.exp(-x) * body)


def test_i0_values():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-15)
    assert bessel_i0(10.0) == pytest.approx(2815.716628466254, rel=1e-14)


def test_i0_matches_series_oracle():
    xs = np.concatenate([np.geomspace(1e-6, 100, 60), np.linspace(25, 40, 16), [300.0, 699.0]])
    for x in xs:
        assert bessel_i0(x) == pytest.approx(i0_series_oracle(x), rel=1e-12), x


def test_i0_scaled_and_overflow():
    assert bessel_i0(800.0, scaled=True) == pytest.approx(float(mpmath.besseli(0, 800) * mpmath.exp(-800)), rel=1e-13)
    assert bessel_i0(5.0, scaled=True) == pytest.approx(bessel_i0(5.0) * math.exp(-5.0), rel=1e-15)
    with pytest.raises(OverflowError):
        bessel_i0(700.5)
    with pytest.raises(ValueError):
        bessel_i0(-1.0)
    with pytest.raises(ValueError):
        bessel_i0(float("nan"))


def test_i1_matches_series():
    for x in (0.3, 2.0, 17.0, 45.0):
        oracle = mpmath.nsum(lambda k: (mpmath.mpf(x) / 2) ** (2 * k + 1) / (mpmath.factorial(k) * mpmath.factorial(k + 1)), [0, mpmath.inf])
        assert bessel_i1(x) == pytest.approx(float(oracle), rel=1e-12)


def test_k1_values():
    assert bessel_k1(1.0) == pytest.approx(0.6019072301972346, rel=1e-13)
    assert bessel_k1(5.0) == pytest.approx(0.004044613445452164, rel=1e-13)
    assert bessel_k1(1e-4) == pytest.approx(1e4, rel=1e-3)


def test_k1_matches_quadrature_oracle():
    for x in np.concatenate([np.geomspace(1e-8, 700, 45), [1.999, 2.0, 2.001]]):
        assert bessel_k1(x) == pytest.approx(k1_quad_oracle(x), rel=1e-10), x


def test_k1_small_argument_limit():
    assert abs(1e-6 * bessel_k1(1e-6) - 1.0) < 1e-4


def test_k1_domain_and_underflow():
    with pytest.raises(ValueError):
        bessel_k1(0.0)
    with pytest.raises(ValueError):
        bessel_k1(-2.0)
    with pytest.warns(BesselUnderflowWarning):
        assert bessel_k1(750.0) == 0.0
    assert bessel_k1(750.0, scaled=True) == pytest.approx(float(mpmath.besselk(1, 750) * mpmath.exp(750)), rel=1e-12)


@given(st.floats(min_value=0.0, max_value=699.0), st.floats(min_value=1e-9, max_value=5.0))
def test_i0_increasing_and_at_least_one(x, dx):
    assert bessel_i0(x) >= 1.0
    assert bessel_i0(x + dx) >= bessel_i0(x)
    # strict once the true increase, about x*dx/2, clears double rounding
    if x * dx > 1e-12:
        assert bessel_i0(x + dx) > bessel_i0(x)


@given(st.floats(min_value=1e-8, max_value=690.0), st.floats(min_value=1e-6, max_value=5.0))
def test_k1_positive_decreasing(x, dx):
    assert bessel_k1(x) > 0.0
    assert bessel_k1(x + dx) < bessel_k1(x)


def test_random_points_against_both_oracles():
    rng = np.random.default_rng(20)
    for x in rng.uniform(0.1, 20.0, 20):
        assert bessel_i0(x) == pytest.approx(i0_series_oracle(x), rel=1e-12)
        assert bessel_k1(x) == pytest.approx(k1_quad_oracle(x), rel=1e-10)


def test_log_binomial_small_cases():
    assert log_binomial(5, 0) == 0.0
    assert log_binomial(4, 2) == math.log(6)
    # exact oracle: ln C(100, 50) = 66.78384...; a quoted "66.7846" is a typo
    assert log_binomial(100, 50) == pytest.approx(math.log(math.comb(100, 50)), rel=1e-15)
    assert log_binomial(100, 50) == pytest.approx(66.78384, abs=1e-5)


def test_log_binomial_exhaustive_small_n():
    for n in range(31):
        for k in range(n + 1):
            assert round(math.exp(log_binomial(n, k))) == math.comb(n, k)
            assert math.exp(log_binomial(n, k)) == pytest.approx(math.comb(n, k), rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=200_000), st.floats(min_value=0.0, max_value=1.0))
def test_log_binomial_big_integer_oracle(n, frac):
    k = int(frac * n)
    exact = math.log(math.comb(n, k))  # math.log of a big int is correctly rounded-ish
    got = log_binomial(n, k)
    assert got == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_log_binomial_branches_against_mpmath():
    for n, k in [(5000, 3), (5000, 64), (5000, 65), (10**6, 500_000), (10**6, 999_900), (123_457, 61_000)]:
        oracle = mpmath.log(mpmath.binomial(n, k))
        assert log_binomial(n, k) == pytest.approx(float(oracle), rel=1e-13)


def test_log_binomial_domain():
    with pytest.raises(ValueError):
        log_binomial(3, 4)
    with pytest.raises(ValueError):
        log_binomial(-1, 0)
    assert log_factorial(0) == 0.0
    assert log_factorial(10) == pytest.approx(math.log(3628800), rel=1e-15)

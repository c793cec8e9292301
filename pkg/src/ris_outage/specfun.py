"""Scalar special functions used by the closed-form outage evaluator.

Only double precision is targeted. I0 uses the power series below
``_I0_SERIES_MAX`` and the Hankel asymptotic expansion above it; K1 uses the
logarithmic series for ``x <= 2`` and Steed's continued fraction beyond.
"""

import math
import warnings

__all__ = [
    "bessel_i0",
    "bessel_i1",
    "bessel_k1",
    "log_binomial",
    "log_factorial",
    "BesselUnderflowWarning",
]

_EPS = 2.0**-53
_I0_SERIES_MAX = 30.0
_I0_OVERFLOW = 700.0
_K1_SERIES_MAX = 2.0
_K1_UNDERFLOW = 700.0
_EULER_GAMMA = 0.57721566490153286061


class BesselUnderflowWarning(RuntimeWarning):
    """K1 was requested unscaled at an argument where it underflows."""


def _check_real(x, name="x"):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return x


def _i0_series(x):
    # all terms positive, so no cancellation
    q = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if term < _EPS * total:
            return total


def _i1_series(x):
    q = 0.25 * x * x
    term = 0.5 * x
    total = term
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + 1))
        total += term
        if term < _EPS * total:
            return total


def _hankel_scaled(x, mu):
    """sqrt(2 pi x) e^{-x} I_nu(x) via the large-argument expansion (mu = 4 nu^2)."""
    total = 1.0
    term = 1.0
    k = 0
    while k < 200:
        k += 1
        nxt = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) < _EPS * abs(total):
            break
    return total


def bessel_i0(x, scaled=False):
    """Modified Bessel function of the first kind, order zero.

    With ``scaled=True`` returns ``exp(-x) * I0(x)``, which never overflows.
    Unscaled evaluation above x = 700 raises ``OverflowError`` instead of
    returning infinity.
    """
    x = _check_real(x)
    if x < 0.0:
        raise ValueError(f"bessel_i0 requires x >= 0, got {x}")
    if x < _I0_SERIES_MAX:
        val = _i0_series(x)
        return val * math.exp(-x) if scaled else val
    # the e^{-x} I0 branch of the expansion contributes only O(e^{-2x})
    s = _hankel_scaled(x, 0.0) / math.sqrt(2.0 * math.pi * x)
    if scaled:
        return s
    if x > _I0_OVERFLOW:
        raise OverflowError(f"I0({x}) exceeds the double range; use scaled=True")
    return s * math.exp(x)


def bessel_i1(x):
    """Modified Bessel function of the first kind, order one (x >= 0)."""
    x = _check_real(x)
    if x < 0.0:
        raise ValueError(f"bessel_i1 requires x >= 0, got {x}")
    if x < _I0_SERIES_MAX:
        return _i1_series(x)
    if x > _I0_OVERFLOW:
        raise OverflowError(f"I1({x}) exceeds the double range")
    return _hankel_scaled(x, 4.0) / math.sqrt(2.0 * math.pi * x) * math.exp(x)


def _k1_series(x):
    # K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k [psi(k+1)+psi(k+2)] (x^2/4)^k / (k!(k+1)!)
    q = 0.25 * x * x
    psi_a = -_EULER_GAMMA  # psi(k+1)
    psi_b = 1.0 - _EULER_GAMMA  # psi(k+2)
    term = 1.0  # (x^2/4)^k / (k!(k+1)!)
    total = psi_a + psi_b
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + 1))
        psi_a += 1.0 / k
        psi_b += 1.0 / (k + 1)
        inc = term * (psi_a + psi_b)
        total += inc
        if abs(inc) < _EPS * abs(total):
            break
    return 1.0 / x + math.log(0.5 * x) * _i1_series(x) - 0.25 * x * total


def _k1_steed_scaled(x):
    """exp(x) * K1(x) for x >= 2 from Steed's CF2 (Temme's normalisation, mu = 0)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError(f"K1 continued fraction did not converge at x={x}")
    h = a1 * h
    k0_scaled = math.sqrt(math.pi / (2.0 * x)) / s
    return k0_scaled * (x + 0.5 - h) / x


def bessel_k1(x, scaled=False):
    """Modified Bessel function of the second kind, order one (x > 0).

    ``scaled=True`` returns ``exp(x) * K1(x)``. Unscaled values above x = 700
    underflow to 0.0 and emit :class:`BesselUnderflowWarning`.
    """
    x = _check_real(x)
    if x <= 0.0:
        raise ValueError(f"bessel_k1 requires x > 0, got {x}")
    if x <= _K1_SERIES_MAX:
        val = _k1_series(x)
        return val * math.exp(x) if scaled else val
    val = _k1_steed_scaled(x)
    if scaled:
        return val
    if x > _K1_UNDERFLOW:
        warnings.warn(f"K1({x}) underflows to 0", BesselUnderflowWarning, stacklevel=2)
        return 0.0
    return val * math.exp(-x)


def _stirling_tail(m):
    # ln m! - [(m + 1/2) ln m - m + ln(2 pi)/2], valid for m >= 64 to ~1e-17
    r = 1.0 / m
    r2 = r * r
    return r * (1.0 / 12 - r2 * (1.0 / 360 - r2 * (1.0 / 1260 - r2 / 1680)))


def log_factorial(n):
    if n < 0:
        raise ValueError(f"log_factorial requires n >= 0, got {n}")
    return math.lgamma(n + 1)


def log_binomial(n, k):
    """Natural log of the binomial coefficient C(n, k)."""
    n = int(n)
    k = int(k)
    if n < 0 or k < 0:
        raise ValueError(f"log_binomial requires nonnegative arguments, got n={n}, k={k}")
    if k > n:
        raise ValueError(f"log_binomial requires k <= n, got n={n}, k={k}")
    kk = min(k, n - k)
    if kk == 0:
        return 0.0
    if n <= 1000:
        return math.log(math.comb(n, kk))
    if kk <= 64:
        return math.fsum(math.log((n - kk + i) / i) for i in range(1, kk + 1))
    # Stirling difference rearranged so the O(n log n) parts cancel analytically
    rest = n - kk
    main = -(kk + 0.5) * math.log(kk / n) - (rest + 0.5) * math.log1p(-kk / n)
    main -= 0.5 * math.log(2.0 * math.pi * n)
    return main + _stirling_tail(n) - _stirling_tail(kk) - _stirling_tail(rest)

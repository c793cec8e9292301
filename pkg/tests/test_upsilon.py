import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ris_outage.model import make_correlation
from ris_outage.upsilon import upsilon_direct, upsilon_expanded, upsilon_for_q, zeta

from conftest import make_block, random_block


def brute_force_total(block, omega, active):
    """Omega * |sum over l, s, m of zeta|^2 by explicit triple loop."""
    total = 0j
    for l, s, m in itertools.product(active, repeat=3):
        total += zeta(block, l, s, m)
    return omega * abs(total) ** 2


def test_zeta_examples():
    blk = make_block(2)
    assert zeta(blk, 1, 1, 1) == 1 + 0j
    assert zeta(blk, 1, 2, 1) == 0
    c = make_correlation("uniform", 2, 0.25)
    blk = make_block(2, c, psi=[0.0, math.pi], d_u=2.0, d_b=2.0)
    z = zeta(blk, 1, 2, 2)
    assert abs(z) == pytest.approx(0.0625, rel=1e-15)
    assert z == pytest.approx(-0.0625, abs=1e-15)


def test_zeta_index_errors():
    blk = make_block(3)
    with pytest.raises(IndexError):
        zeta(blk, 0, 1, 1)
    with pytest.raises(IndexError):
        zeta(blk, 1, 4, 1)
    with pytest.raises(IndexError):
        zeta(blk, 1, 2, 3, active=[1, 3])


def test_direct_examples():
    rng = np.random.default_rng(1)
    one = make_block(1, psi=rng.uniform(0, 6, 1), theta=rng.uniform(0, 6, 1), phi=rng.uniform(0, 6, 1), delta=3.7)
    assert upsilon_direct(one, 50.0).total == pytest.approx(50.0, rel=1e-15)
    two = make_block(2)
    assert upsilon_direct(two, 7.0).total == pytest.approx(28.0, rel=1e-15)
    assert brute_force_total(two, 7.0, [1, 2]) == pytest.approx(28.0, rel=1e-15)
    empty = upsilon_direct(two, 7.0, active=[])
    assert empty.total == 0.0 and empty.active_elements == 0


def test_expanded_examples():
    blk = make_block(1, d_u=3.0, d_b=2.0, delta=2.5)
    v = upsilon_expanded(blk, 10.0)
    assert v.diag_sum == pytest.approx(6.0**-2.5, rel=1e-15)
    assert v.cross_sum == 0.0
    assert v.total == pytest.approx(10.0 * v.diag_sum, rel=1e-15)
    assert upsilon_expanded(make_block(2), 1.0).total == pytest.approx(4.0, rel=1e-14)


def test_direct_matches_brute_force_triple_sum():
    rng = np.random.default_rng(2)
    for _ in range(10):
        m = int(rng.integers(1, 6))
        blk = random_block(rng, m, kind=str(rng.choice(["uniform", "exponential"])))
        active = [e for e in range(1, m + 1) if rng.random() > 0.3] or [1]
        ref = brute_force_total(blk, 3.0, active)
        assert upsilon_direct(blk, 3.0, active).total == pytest.approx(ref, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.sampled_from(["identity", "uniform", "exponential"]))
def test_expanded_equals_direct(seed, m, kind):
    rng = np.random.default_rng(seed)
    blk = random_block(rng, m, kind)
    active = [e for e in range(1, m + 1) if rng.random() > 0.2]
    d = upsilon_direct(blk, 100.0, active)
    e = upsilon_expanded(blk, 100.0, active)
    assert e.total == pytest.approx(d.total, rel=1e-9, abs=1e-9 * 100.0 * e.diag_sum)
    assert e.diag_sum == pytest.approx(d.diag_sum, rel=1e-12)
    assert e.active_elements == d.active_elements == len(active)


def test_expanded_refuses_large_blocks():
    with pytest.raises(ValueError, match="40"):
        upsilon_expanded(make_block(41), 1.0)


@given(st.integers(0, 10**6), st.floats(1.01, 20.0))
def test_distance_scaling_is_exact(seed, c):
    rng = np.random.default_rng(seed)
    blk = random_block(rng, 6)
    far = make_block(6, blk.correlation, blk.phases_psi, blk.phases_theta, blk.phases_phi, blk.dist_user_m * c, blk.dist_bs_m, blk.pathloss_exp)
    ratio = upsilon_direct(far, 1.0).total / upsilon_direct(blk, 1.0).total
    assert ratio == pytest.approx(c ** (-blk.pathloss_exp), rel=1e-12)


def test_distance_scaling_identity_diagonal():
    blk = make_block(5, d_u=2.0, d_b=3.0, delta=2.0)
    far = make_block(5, d_u=4.0, d_b=3.0, delta=2.0)
    assert upsilon_direct(far, 1.0).diag_sum / upsilon_direct(blk, 1.0).diag_sum == 0.25


def test_aligned_phases_maximise():
    rng = np.random.default_rng(5)
    for kind in ("identity", "uniform", "exponential"):
        c = make_correlation(kind, 7, 0.4)
        aligned = upsilon_direct(make_block(7, c), 1.0).total
        for _ in range(50):
            ph = rng.uniform(0, 2 * np.pi, size=(3, 7))
            assert upsilon_direct(make_block(7, c, *ph), 1.0).total <= aligned * (1 + 1e-12)


def test_more_active_elements_never_hurt_when_coherent():
    blk = make_block(9)
    totals = [upsilon_for_q(blk, 1.0, q).total for q in range(10)]
    assert totals == sorted(totals, reverse=True)
    assert totals[-1] == 0.0
    assert totals[0] == pytest.approx(81.0, rel=1e-14)


def test_cross_sum_decomposition():
    rng = np.random.default_rng(6)
    blk = random_block(rng, 5)
    v = upsilon_direct(blk, 4.0)
    assert v.total == pytest.approx(4.0 * (v.diag_sum + v.cross_sum), rel=1e-14)
    assert v.total >= 0.0

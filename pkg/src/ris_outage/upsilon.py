"""The deterministic SNR aggregate Upsilon of one RIS block.

Two routes that must agree: :func:`upsilon_direct` squares the complex triple
sum of zeta terms (factored to O(M'^2)), :func:`upsilon_expanded` expands the
squared modulus into the diagonal |zeta|^2 terms plus one cosine cross term
per unordered pair of distinct index triples.

Element labels (l, s, m and the ``active`` set) are 1-based.
"""

from dataclasses import dataclass

import numpy as np

from .failure import FailurePattern

__all__ = ["UpsilonValue", "active_mask", "upsilon_direct", "upsilon_expanded", "zeta", "upsilon_for_q"]

EXPANDED_MAX_M = 40


@dataclass(frozen=True)
class UpsilonValue:
    total: float
    diag_sum: float
    cross_sum: float
    active_elements: int


def active_mask(block, active=None):
    """Boolean mask over the block's elements from a label set or pattern."""
    m = block.m_prime
    if active is None:
        return np.ones(m, dtype=bool)
    if isinstance(active, FailurePattern):
        if active.m_prime != m:
            raise ValueError(f"pattern is for {active.m_prime} elements, block has {m}")
        return active.active_mask()
    mask = np.zeros(m, dtype=bool)
    for e in active:
        e = int(e)
        if not 1 <= e <= m:
            raise IndexError(f"element {e} outside 1..{m}")
        mask[e - 1] = True
    return mask


def _omega_value(omega):
    return float(getattr(omega, "omega", omega))


def _term_phase(block, s, m):
    # phase of zeta_{l,s,m}; l only enters through the correlation amplitude
    return block.phases_psi[m] - block.phases_theta[s] - block.phases_phi[m]


def zeta(block, l, s, m, active=None):
    """Complex term zeta_{l,s,m} of the block's triple sum (1-based labels)."""
    mask = active_mask(block, active)
    for name, idx in (("l", l), ("s", s), ("m", m)):
        if not 1 <= idx <= block.m_prime:
            raise IndexError(f"{name}={idx} outside 1..{block.m_prime}")
        if not mask[idx - 1]:
            raise IndexError(f"{name}={idx} refers to a failed element")
    li, si, mi = l - 1, s - 1, m - 1
    a = block.correlation
    mag = np.sqrt(a[li, si] * a[li, mi] * block.distance_gain)
    return complex(mag * np.exp(1j * _term_phase(block, si, mi)))


def _coherent_sum(block, mask):
    # sum_{l,s,m} sqrt(a_ls a_lm) e^{i(psi_m - theta_s - phi_m)}
    #   = sum_l (sum_s r_ls e^{-i theta_s}) (sum_m r_lm e^{i(psi_m - phi_m)})
    r = np.sqrt(block.correlation[np.ix_(mask, mask)])
    x = np.exp(-1j * block.phases_theta[mask])
    y = np.exp(1j * (block.phases_psi[mask] - block.phases_phi[mask]))
    return complex(np.sum((r @ x) * (r @ y)))


def upsilon_direct(block, omega, active=None):
    """Omega * |sum of zeta over active l, s, m|^2.

    An empty active set (every element failed) carries no signal: total 0.
    """
    mask = active_mask(block, active)
    n = int(mask.sum())
    om = _omega_value(omega)
    if n == 0:
        return UpsilonValue(0.0, 0.0, 0.0, 0)
    dg = block.distance_gain
    power = abs(_coherent_sum(block, mask)) ** 2 * dg
    a = block.correlation[np.ix_(mask, mask)]
    diag = float(np.sum(a.sum(axis=1) ** 2)) * dg
    return UpsilonValue(om * power, diag, power - diag, n)


def upsilon_expanded(block, omega, active=None):
    """Same quantity from |zeta|^2 diagonal terms plus 2 * sum of eta cross terms.

    Each unordered pair of distinct triples (l,s,m) != (l',s',m') contributes
    one eta = |zeta||zeta'| cos(phase - phase'). Cost is O(M'^6); refuses
    blocks larger than 40 elements.
    """
    if block.m_prime > EXPANDED_MAX_M:
        raise ValueError(f"upsilon_expanded is limited to {EXPANDED_MAX_M} elements, block has {block.m_prime}")
    mask = active_mask(block, active)
    idx = np.flatnonzero(mask)
    n = idx.size
    om = _omega_value(omega)
    if n == 0:
        return UpsilonValue(0.0, 0.0, 0.0, 0)
    a = block.correlation
    dg = block.distance_gain
    l, s, m = (g.ravel() for g in np.meshgrid(idx, idx, idx, indexing="ij"))
    a_ls = a[l, s]
    a_lm = a[l, m]
    zeta_sq = a_ls * a_lm * dg
    amp = np.sqrt(a_ls * a_lm)
    phase = _term_phase(block, s, m)
    diag = float(np.sum(zeta_sq))

    # eta_{t,t'} = sqrt(a_ls a_lm a_l's' a_l'm') dg cos(phase_t - phase_t'), t < t'
    cross = 0.0
    n_terms = amp.size
    chunk = max(1, 2_000_000 // n_terms)
    for start in range(0, n_terms - 1, chunk):
        stop = min(start + chunk, n_terms - 1)
        rows = np.arange(start, stop)
        eta = amp[rows, None] * amp[None, :] * dg * np.cos(phase[rows, None] - phase[None, :])
        upper = np.arange(n_terms)[None, :] > rows[:, None]
        cross += float(np.sum(eta, where=upper))
    cross *= 2.0
    return UpsilonValue(om * (diag + cross), diag, cross, int(n))


def upsilon_for_q(block, omega, q):
    """Upsilon with the first q elements failed."""
    mask = np.ones(block.m_prime, dtype=bool)
    mask[:q] = False
    return upsilon_direct(block, omega, active=[int(e) + 1 for e in np.flatnonzero(mask)])

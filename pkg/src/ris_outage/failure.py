"""Element-failure combinatorics shared by the closed form and the simulator.

Element labels are 1-based, matching the element index e in 1..M'.
"""

import math
from dataclasses import dataclass

import numpy as np

from .specfun import log_binomial

__all__ = ["FailurePattern", "failure_pmf", "failure_pmf_vector", "first_q_pattern", "sample_pattern"]


@dataclass(frozen=True)
class FailurePattern:
    m_prime: int
    failed: tuple

    def __post_init__(self):
        failed = tuple(int(e) for e in self.failed)
        if len(set(failed)) != len(failed):
            raise ValueError(f"duplicate failed elements: {failed}")
        if any(e < 1 or e > self.m_prime for e in failed):
            raise ValueError(f"failed elements must lie in 1..{self.m_prime}: {failed}")
        object.__setattr__(self, "failed", failed)

    @property
    def q(self):
        return len(self.failed)

    @property
    def active(self):
        """Surviving element labels in increasing order."""
        dead = set(self.failed)
        return tuple(e for e in range(1, self.m_prime + 1) if e not in dead)

    def active_mask(self):
        mask = np.ones(self.m_prime, dtype=bool)
        mask[[e - 1 for e in self.failed]] = False
        return mask


def _check_p(p):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"failure probability must lie in [0, 1], got {p}")
    return p


def sample_pattern(rng, m_prime, p):
    """Fail each element independently with probability ``p``.

    ``rng`` is a ``numpy.random.Generator``.
    """
    p = _check_p(p)
    u = rng.random(int(m_prime))
    failed = tuple(int(e) + 1 for e in np.flatnonzero(u < p))
    return FailurePattern(int(m_prime), failed)


def first_q_pattern(m_prime, q):
    """The pattern where elements 1..q have failed."""
    if not 0 <= q <= m_prime:
        raise ValueError(f"q must lie in [0, {m_prime}], got {q}")
    return FailurePattern(int(m_prime), tuple(range(1, q + 1)))


def failure_pmf(m_prime, p, q):
    """P(Q = q) for Q ~ Binomial(m_prime, p), evaluated in log space."""
    p = _check_p(p)
    m_prime = int(m_prime)
    q = int(q)
    if m_prime < 0 or not 0 <= q <= m_prime:
        raise ValueError(f"need 0 <= q <= m_prime, got q={q}, m_prime={m_prime}")
    # degenerate endpoints: 0**0 = 1
    if p == 0.0:
        return 1.0 if q == 0 else 0.0
    if p == 1.0:
        return 1.0 if q == m_prime else 0.0
    return math.exp(log_binomial(m_prime, q) + q * math.log(p) + (m_prime - q) * math.log1p(-p))


def failure_pmf_vector(m_prime, p):
    return np.array([failure_pmf(m_prime, p, q) for q in range(m_prime + 1)])

"""Monte Carlo outage oracle.

Each trial draws correlated outdated/instantaneous gains for every block on
both hops, fails elements independently with probability p, picks the block
with the largest outdated U-side SNR and records the instantaneous SNR of
that path. Variates come from the counter-based streams in :mod:`.rng`, so
results depend only on (scenario, seed, trial count), never on how trials
are split across workers.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels, rng
from ._kernels_py import correlated_powers
from .upsilon import upsilon_direct

__all__ = [
    "CHUNK_TRIALS",
    "McEstimate",
    "TrialDraw",
    "default_workers",
    "draw_correlated_pair",
    "estimate_outage",
    "estimate_outage_curve",
    "run_trial",
    "simulate_snr",
]

CHUNK_TRIALS = 8192
MIN_TRIALS = 10_000
Z95 = 1.96


@dataclass(frozen=True)
class TrialDraw:
    """Everything drawn in one trial; per-block arrays are in flat block order."""

    outdated_u: np.ndarray
    outdated_b: np.ndarray
    instant_u: np.ndarray
    instant_b: np.ndarray
    failures: np.ndarray
    selected: tuple
    snr: float


@dataclass(frozen=True)
class McEstimate:
    outage_prob: float
    trials: int
    ci_halfwidth: float
    seed: int
    outages: int


def default_workers():
    n = os.cpu_count() or 1
    cap = os.environ.get("RIS_OUTAGE_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"RIS_OUTAGE_THREADS must be an integer, got {cap!r}") from None
    return n


def draw_correlated_pair(rng_, lam, rho, size=None):
    """(outdated, instantaneous) exponential powers with mean ``lam``.

    The instantaneous complex gain is rho * outdated + sqrt(1 - rho^2) *
    innovation, so the squared magnitudes have correlation rho^2.
    ``rng_`` is a ``numpy.random.Generator``.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    shape = () if size is None else size
    u = rng_.random((4,) + (shape if isinstance(shape, tuple) else (shape,)))
    out, inst = correlated_powers(u[0], u[1], u[2], u[3], float(lam), float(rho))
    if size is None:
        return float(out), float(inst)
    return out, inst


def run_trial(scn, stream):
    """One trial evaluated element by element, independent of the batch kernels.

    ``stream`` is an :class:`rng.TrialStream`. Slower than the kernels by
    orders of magnitude; used to cross-check them.
    """
    nb = scn.n_paths
    m = scn.m_prime
    out_u = np.empty(nb)
    out_b = np.empty(nb)
    inst_u = np.empty(nb)
    inst_b = np.empty(nb)
    fails = np.zeros(nb, dtype=np.int64)
    ups = np.empty(nb)
    for b, block in enumerate(scn.blocks):
        u = [stream.uniform(b, slot) for slot in range(rng.SLOT_FAILURE0)]
        out_u[b], inst_u[b] = (float(v) for v in correlated_powers(*(np.float64(x) for x in u[:4]), scn.lambda_u, scn.rho1))
        out_b[b], inst_b[b] = (float(v) for v in correlated_powers(*(np.float64(x) for x in u[4:]), scn.lambda_b, scn.rho2))
        active = [e + 1 for e in range(m) if stream.uniform(b, rng.SLOT_FAILURE0 + e) >= scn.fail_prob]
        fails[b] = m - len(active)
        ups[b] = upsilon_direct(block, scn.omega, active).total
    metric = out_u * ups
    best = int(np.argmax(metric))  # first maximum wins ties
    block = scn.blocks[best]
    return TrialDraw(
        outdated_u=out_u,
        outdated_b=out_b,
        instant_u=inst_u,
        instant_b=inst_b,
        failures=fails,
        selected=(block.ris_index, block.block_index),
        snr=float(ups[best] * inst_u[best] * inst_b[best]),
    )


def _kernel_inputs(scn):
    blocks = scn.blocks
    r = np.ascontiguousarray(np.stack([np.sqrt(b.correlation) for b in blocks]))
    theta = np.stack([b.phases_theta for b in blocks])
    chi = np.stack([b.phases_psi - b.phases_phi for b in blocks])
    scale = np.array([scn.omega * b.distance_gain for b in blocks])
    ups_full = np.array([upsilon_direct(b, scn.omega).total for b in blocks])
    return dict(
        lam_u=float(scn.lambda_u),
        lam_b=float(scn.lambda_b),
        rho1=float(scn.rho1),
        rho2=float(scn.rho2),
        p=float(scn.fail_prob),
        r=r,
        xr=np.ascontiguousarray(np.cos(theta)),
        xi=np.ascontiguousarray(-np.sin(theta)),
        yr=np.ascontiguousarray(np.cos(chi)),
        yi=np.ascontiguousarray(np.sin(chi)),
        scale=np.ascontiguousarray(scale),
        ups_full=np.ascontiguousarray(ups_full),
    )


def simulate_snr(scn, trials, seed, workers=None, backend=None, return_selected=False):
    """Selected-path instantaneous SNR for trials 0..trials-1.

    Work is cut into fixed chunks of ``CHUNK_TRIALS`` trials regardless of the
    worker count, so the output is bit-identical for any ``workers``.
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    kern = kernels.get(backend)
    inputs = _kernel_inputs(scn)
    skey = rng.seed_key(seed)
    bounds = [(t, min(t + CHUNK_TRIALS, trials)) for t in range(0, trials, CHUNK_TRIALS)]

    def run(bound):
        return kern.simulate(skey, bound[0], bound[1], **inputs)

    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(bounds) == 1:
        parts = [run(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    snr = np.concatenate([p[0] for p in parts])
    if return_selected:
        return snr, np.concatenate([p[1] for p in parts])
    return snr


def _estimate(snr, gamma_t, seed):
    n = snr.size
    outages = int(np.count_nonzero(snr < gamma_t))
    p_hat = outages / n
    return McEstimate(
        outage_prob=p_hat,
        trials=n,
        ci_halfwidth=Z95 * math.sqrt(p_hat * (1.0 - p_hat) / n),
        seed=int(seed),
        outages=outages,
    )


def _check_trials(trials):
    if int(trials) < MIN_TRIALS:
        raise ValueError(f"at least {MIN_TRIALS} trials are required, got {trials}")


def estimate_outage(scn, gamma_t=None, trials=100_000, seed=0, workers=None, backend=None):
    """Empirical P(selected-path SNR < gamma_t) with a 95% normal-approx CI."""
    _check_trials(trials)
    gamma = scn.gamma_t if gamma_t is None else float(gamma_t)
    snr = simulate_snr(scn, trials, seed, workers=workers, backend=backend)
    return _estimate(snr, gamma, seed)


def estimate_outage_curve(scn, gammas, trials=100_000, seed=0, workers=None, backend=None):
    """Outage at several thresholds from one shared set of trials."""
    _check_trials(trials)
    snr = simulate_snr(scn, trials, seed, workers=workers, backend=backend)
    return [_estimate(snr, float(g), seed) for g in gammas]

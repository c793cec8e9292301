"""Pure numpy trial kernel; used when the compiled extension is unavailable.

Must follow exactly the per-trial recipe of ``_kernels.pyx``:

* stream (seed, trial, block, slot) -> uniform u in [0, 1)
* unit-power complex gain from (u_a, u_b): sqrt(-log1p(-u_a)) * exp(2j*pi*u_b)
* instantaneous = rho * outdated + sqrt(1 - rho^2) * innovation, powers scaled by lambda
* element e active iff its failure uniform >= p
* block chosen by the largest outdated U-side SNR, ties to the lowest index
"""

import numpy as np

from . import rng

BACKEND = "numpy"
TWO_PI = 2.0 * np.pi


def unit_gain(u_mag, u_phase):
    """Unit-power circular complex Gaussian as (real, imag, power)."""
    power = -np.log1p(-u_mag)
    amp = np.sqrt(power)
    ang = TWO_PI * u_phase
    return amp * np.cos(ang), amp * np.sin(ang), power


def correlated_powers(u0, u1, u2, u3, lam, rho):
    """(outdated, instantaneous) squared magnitudes from four uniforms."""
    re0, im0, p0 = unit_gain(u0, u1)
    re1, im1, _ = unit_gain(u2, u3)
    c = np.sqrt(1.0 - rho * rho)
    re = rho * re0 + c * re1
    im = rho * im0 + c * im1
    return lam * p0, lam * (re * re + im * im)


def block_gains(tkeys, block, lam_u, lam_b, rho1, rho2):
    """All four per-block gains for a batch of trial keys."""
    u = [rng.uniforms_from_keys(tkeys, block, slot) for slot in range(rng.SLOT_FAILURE0)]
    out_u, inst_u = correlated_powers(u[0], u[1], u[2], u[3], lam_u, rho1)
    out_b, inst_b = correlated_powers(u[4], u[5], u[6], u[7], lam_b, rho2)
    return out_u, inst_u, out_b, inst_b


def active_masks(tkeys, block, m, p):
    act = np.empty((tkeys.size, m), dtype=bool)
    for e in range(m):
        act[:, e] = rng.uniforms_from_keys(tkeys, block, rng.SLOT_FAILURE0 + e) >= p
    return act


def batch_upsilon(act, r, x, y, scale):
    """Upsilon for each row of an activity mask (trials x elements)."""
    xa = np.where(act, x, 0.0)
    ya = np.where(act, y, 0.0)
    s = np.sum(np.where(act, (xa @ r.T) * (ya @ r.T), 0.0), axis=1)
    return scale * (s.real * s.real + s.imag * s.imag)


def simulate(seed_key, t0, t1, lam_u, lam_b, rho1, rho2, p, r, xr, xi, yr, yi, scale, ups_full):
    """Selected-path SNR and selected block for trials t0..t1-1.

    ``seed_key`` is ``rng.seed_key(seed)``, precomputed by the caller.
    """
    tkeys = rng.mix64_array(np.uint64(seed_key) ^ np.arange(t0, t1, dtype=np.uint64))
    n = tkeys.size
    nblocks, m = xr.shape
    best_metric = np.full(n, -1.0)
    snr = np.zeros(n)
    sel = np.zeros(n, dtype=np.int64)
    x = xr + 1j * xi
    y = yr + 1j * yi
    for b in range(nblocks):
        out_u, inst_u, _, inst_b = block_gains(tkeys, b, lam_u, lam_b, rho1, rho2)
        if p > 0.0:
            ups = batch_upsilon(active_masks(tkeys, b, m, p), r[b], x[b], y[b], scale[b])
        else:
            ups = np.full(n, ups_full[b])
        metric = out_u * ups
        better = metric > best_metric
        best_metric = np.where(better, metric, best_metric)
        snr = np.where(better, ups * inst_u * inst_b, snr)
        sel = np.where(better, b, sel)
    return snr, sel

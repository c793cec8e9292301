# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernel. Mirrors ``_kernels_py.simulate`` step for step."""

import numpy as np

from libc.math cimport cos, log1p, sin, sqrt, M_PI
from libc.stdint cimport int64_t, uint64_t

BACKEND = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef int SLOT_BITS = 20
cdef int SLOT_FAILURE0 = 8
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = z + GOLDEN
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline double uniform(uint64_t tkey, uint64_t block, uint64_t slot) noexcept nogil:
    cdef uint64_t k = mix64(tkey ^ ((block << SLOT_BITS) | slot))
    return <double>(k >> 11) * INV_2_53


cdef inline void correlated(uint64_t tkey, uint64_t block, uint64_t slot0, double lam, double rho,
                            double* outdated, double* instant) noexcept nogil:
    cdef double p0 = -log1p(-uniform(tkey, block, slot0))
    cdef double a0 = sqrt(p0)
    cdef double ang0 = 2.0 * M_PI * uniform(tkey, block, slot0 + 1)
    cdef double p1 = -log1p(-uniform(tkey, block, slot0 + 2))
    cdef double a1 = sqrt(p1)
    cdef double ang1 = 2.0 * M_PI * uniform(tkey, block, slot0 + 3)
    cdef double c = sqrt(1.0 - rho * rho)
    cdef double re = rho * a0 * cos(ang0) + c * a1 * cos(ang1)
    cdef double im = rho * a0 * sin(ang0) + c * a1 * sin(ang1)
    outdated[0] = lam * p0
    instant[0] = lam * (re * re + im * im)


def simulate(uint64_t seed_key, int64_t t0, int64_t t1,
             double lam_u, double lam_b, double rho1, double rho2, double p,
             double[:, :, ::1] r, double[:, ::1] xr, double[:, ::1] xi,
             double[:, ::1] yr, double[:, ::1] yi,
             double[::1] scale, double[::1] ups_full):
    """Selected-path SNR and selected block for trials t0..t1-1.

    ``seed_key`` is ``rng.seed_key(seed)``, precomputed by the caller.
    """
    cdef Py_ssize_t n = t1 - t0
    cdef Py_ssize_t nblocks = xr.shape[0]
    cdef Py_ssize_t m = xr.shape[1]
    snr_arr = np.zeros(n, dtype=np.float64)
    sel_arr = np.zeros(n, dtype=np.int64)
    act_arr = np.zeros(m, dtype=np.uint8)
    cdef double[::1] snr = snr_arr
    cdef int64_t[::1] sel = sel_arr
    cdef unsigned char[::1] act = act_arr
    cdef Py_ssize_t i, b, l, s
    cdef uint64_t tkey
    cdef double best, out_u, inst_u, out_b, inst_b, ups, metric
    cdef double axr, axi, ayr, ayi, rr, pr, pi, sr, si

    with nogil:
        for i in range(n):
            tkey = mix64(seed_key ^ <uint64_t>(t0 + i))
            best = -1.0
            for b in range(nblocks):
                correlated(tkey, b, 0, lam_u, rho1, &out_u, &inst_u)
                correlated(tkey, b, 4, lam_b, rho2, &out_b, &inst_b)
                if p > 0.0:
                    for l in range(m):
                        act[l] = uniform(tkey, b, SLOT_FAILURE0 + l) >= p
                    sr = 0.0
                    si = 0.0
                    for l in range(m):
                        if not act[l]:
                            continue
                        axr = 0.0
                        axi = 0.0
                        ayr = 0.0
                        ayi = 0.0
                        for s in range(m):
                            if act[s]:
                                rr = r[b, l, s]
                                axr = axr + rr * xr[b, s]
                                axi = axi + rr * xi[b, s]
                                ayr = ayr + rr * yr[b, s]
                                ayi = ayi + rr * yi[b, s]
                        pr = axr * ayr - axi * ayi
                        pi = axr * ayi + axi * ayr
                        sr = sr + pr
                        si = si + pi
                    ups = scale[b] * (sr * sr + si * si)
                else:
                    ups = ups_full[b]
                metric = out_u * ups
                if metric > best:
                    best = metric
                    snr[i] = ups * inst_u * inst_b
                    sel[i] = b
    return snr_arr, sel_arr

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mechanism kernels: Philox4x64-10 plus the hot loops.

Mirrors the contracts of ``ldpgap.backends.pykernels``; record ``i`` of
run ``r`` uses the Philox block with counter (start_row + i + 1, 0, r, 0).
"""

from libc.math cimport fabs, log1p

import numpy as np

ctypedef unsigned long long u64
cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

cdef u64 M0 = 0xD2E7470EE14C6C93
cdef u64 M1 = 0xCA5A826395121157
cdef u64 W0 = 0x9E3779B97F4A7C15
cdef u64 W1 = 0xBB67AE8584CAA73B
cdef double U53 = 1.0 / 9007199254740992.0  # 2**-53


cdef inline void _philox(u64 c0, u64 c1, u64 c2, u64 c3,
                         u64 k0, u64 k1, u64* out) nogil:
    cdef int r
    cdef u128 p0, p1
    for r in range(10):
        p0 = <u128>M0 * c0
        p1 = <u128>M1 * c2
        c0 = (<u64>(p1 >> 64)) ^ c1 ^ k0
        c1 = <u64>p1
        c2 = (<u64>(p0 >> 64)) ^ c3 ^ k1
        c3 = <u64>p0
        k0 = k0 + W0
        k1 = k1 + W1
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


cdef inline double _u01(u64 w) nogil:
    return <double>(w >> 11) * U53


cdef inline double _uopen(u64 w) nogil:
    return (<double>(w >> 11) + 0.5) * U53


cdef inline long _grr(long x, long d, double a, double u) nogil:
    cdef double r
    cdef long j
    if u < a:
        return x
    r = (u - a) / (1.0 - a)
    j = <long>(r * (d - 1))
    if j > d - 2:
        j = d - 2
    return j if j < x else j + 1


cdef inline double _laplace(double scale, double u) nogil:
    cdef double c = u - 0.5
    cdef double m
    if scale == 0.0:
        return 0.0
    m = log1p(-2.0 * fabs(c))
    return -scale * m if c > 0.0 else scale * m


def philox_raw(u64 key0, u64 key1, u64 id1, u64 id2, u64 id3,
               u64 block0, Py_ssize_t nblocks):
    """Blocks block0..block0+nblocks-1 as a (nblocks, 4) uint64 array."""
    out_arr = np.empty((nblocks, 4), dtype=np.uint64)
    cdef u64[:, ::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(nblocks):
            _philox(block0 + i + 1, id1, id2, id3, key0, key1, &out[i, 0])
    return out_arr


def perturb_r_batch(groups, values, long d, double a, double b,
                    u64 key0, u64 key1, u64 run=0, u64 start_row=0):
    cdef long[::1] g = np.ascontiguousarray(groups, dtype=np.int64)
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0], i
    out_g_arr = np.empty(n, dtype=np.int64)
    out_v_arr = np.empty(n, dtype=np.float64)
    cdef long[::1] og = out_g_arr
    cdef double[::1] ov = out_v_arr
    cdef u64 w[4]
    cdef long g2, bit
    cdef double val
    with nogil:
        for i in range(n):
            _philox(start_row + i + 1, 0, run, 0, key0, key1, w)
            g2 = _grr(g[i], d, a, _u01(w[0]))
            val = v[i] if g2 == g[i] else 0.0
            bit = 1 if _u01(w[1]) < (1.0 + val) * 0.5 else 0
            bit = _grr(bit, 2, b, _u01(w[2]))
            og[i] = g2
            ov[i] = 2.0 * bit - 1.0
    return out_g_arr, out_v_arr


def perturb_l_batch(groups, values, long d, double a,
                    double scale_keep, double scale_flip,
                    u64 key0, u64 key1, u64 run=0, u64 start_row=0):
    cdef long[::1] g = np.ascontiguousarray(groups, dtype=np.int64)
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0], i
    out_g_arr = np.empty(n, dtype=np.int64)
    out_v_arr = np.empty(n, dtype=np.float64)
    cdef long[::1] og = out_g_arr
    cdef double[::1] ov = out_v_arr
    cdef u64 w[4]
    cdef long g2
    with nogil:
        for i in range(n):
            _philox(start_row + i + 1, 0, run, 0, key0, key1, w)
            g2 = _grr(g[i], d, a, _u01(w[0]))
            if g2 == g[i]:
                ov[i] = v[i] + _laplace(scale_keep, _uopen(w[1]))
            else:
                ov[i] = _laplace(scale_flip, _uopen(w[1]))
            og[i] = g2
    return out_g_arr, out_v_arr


def run_sums_r(groups, values, long d, double a, double b,
               u64 key0, u64 key1, u64 run0, Py_ssize_t nruns):
    """Per-run counts and value sums for groups {0, 1} under repeated
    application of the discretizing mechanism (Neumaier accumulation)."""
    cdef long[::1] g = np.ascontiguousarray(groups, dtype=np.int64)
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t K = g.shape[0], i, j
    counts_arr = np.zeros((nruns, 2), dtype=np.int64)
    sums_arr = np.zeros((nruns, 2), dtype=np.float64)
    cdef long[:, ::1] counts = counts_arr
    cdef double[:, ::1] sums = sums_arr
    cdef u64 w[4]
    cdef long g2, bit, n0, n1
    cdef double val, s0, s1, comp0, comp1, t
    with nogil:
        for j in range(nruns):
            n0 = 0; n1 = 0
            s0 = 0.0; s1 = 0.0; comp0 = 0.0; comp1 = 0.0
            for i in range(K):
                _philox(i + 1, 0, run0 + j, 0, key0, key1, w)
                g2 = _grr(g[i], d, a, _u01(w[0]))
                val = v[i] if g2 == g[i] else 0.0
                bit = 1 if _u01(w[1]) < (1.0 + val) * 0.5 else 0
                bit = _grr(bit, 2, b, _u01(w[2]))
                val = 2.0 * bit - 1.0
                if g2 == 0:
                    n0 += 1
                    t = s0 + val
                    comp0 += (s0 - t) + val if fabs(s0) >= fabs(val) else (val - t) + s0
                    s0 = t
                elif g2 == 1:
                    n1 += 1
                    t = s1 + val
                    comp1 += (s1 - t) + val if fabs(s1) >= fabs(val) else (val - t) + s1
                    s1 = t
            counts[j, 0] = n0
            counts[j, 1] = n1
            sums[j, 0] = s0 + comp0
            sums[j, 1] = s1 + comp1
    return counts_arr, sums_arr


def run_sums_l(groups, values, long d, double a,
               double scale_keep, double scale_flip,
               u64 key0, u64 key1, u64 run0, Py_ssize_t nruns):
    """Per-run counts and value sums for groups {0, 1} under repeated
    application of the Laplace-noise mechanism (Neumaier accumulation)."""
    cdef long[::1] g = np.ascontiguousarray(groups, dtype=np.int64)
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t K = g.shape[0], i, j
    counts_arr = np.zeros((nruns, 2), dtype=np.int64)
    sums_arr = np.zeros((nruns, 2), dtype=np.float64)
    cdef long[:, ::1] counts = counts_arr
    cdef double[:, ::1] sums = sums_arr
    cdef u64 w[4]
    cdef long g2, n0, n1
    cdef double val, s0, s1, comp0, comp1, t
    with nogil:
        for j in range(nruns):
            n0 = 0; n1 = 0
            s0 = 0.0; s1 = 0.0; comp0 = 0.0; comp1 = 0.0
            for i in range(K):
                _philox(i + 1, 0, run0 + j, 0, key0, key1, w)
                g2 = _grr(g[i], d, a, _u01(w[0]))
                if g2 == g[i]:
                    val = v[i] + _laplace(scale_keep, _uopen(w[1]))
                else:
                    val = _laplace(scale_flip, _uopen(w[1]))
                if g2 == 0:
                    n0 += 1
                    t = s0 + val
                    comp0 += (s0 - t) + val if fabs(s0) >= fabs(val) else (val - t) + s0
                    s0 = t
                elif g2 == 1:
                    n1 += 1
                    t = s1 + val
                    comp1 += (s1 - t) + val if fabs(s1) >= fabs(val) else (val - t) + s1
                    s1 = t
            counts[j, 0] = n0
            counts[j, 1] = n1
            sums[j, 0] = s0 + comp0
            sums[j, 1] = s1 + comp1
    return counts_arr, sums_arr


def resample_indices(long m, Py_ssize_t n, u64 key0, u64 key1, u64 start_row=0):
    """n draws with replacement from range(m), one block per row."""
    out_arr = np.empty(n, dtype=np.int64)
    cdef long[::1] out = out_arr
    cdef Py_ssize_t i
    cdef long idx
    cdef u64 w[4]
    with nogil:
        for i in range(n):
            _philox(start_row + i + 1, 0, 0, 0, key0, key1, w)
            idx = <long>(_u01(w[0]) * m)
            out[i] = idx if idx < m - 1 else m - 1
    return out_arr

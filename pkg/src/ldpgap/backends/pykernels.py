"""Numpy-vectorized mechanism kernels (fallback backend).

Same contracts as the compiled backend in ``_speedups``. Integer outputs
(groups, discretized values, counts) are bit-identical across backends;
float outputs can differ in the last ulp because numpy's vectorized
``log1p`` is not guaranteed to round like the scalar libm call.

Counter layout (see :mod:`ldpgap.rng`): record ``i`` of run ``r`` uses
the Philox block with counter ``(start_row + i + 1, 0, r, 0)``.
"""

from __future__ import annotations

import numpy as np

_U53 = 1.0 / (1 << 53)
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_SH11 = np.uint64(11)

# bound on runs*clients elements materialized per batch
_CHUNK = 1 << 21


def _mulhilo(m, x):
    """128-bit product of constant ``m`` and uint64 array ``x`` as (hi, lo).

    uint64 multiplication wraps mod 2**64, so ``lo`` is direct; ``hi`` is
    assembled from 32-bit limbs without overflow.
    """
    lo = m * x
    mlo = m & _LO32
    mhi = m >> _SH32
    xlo = x & _LO32
    xhi = x >> _SH32
    t = (mlo * xlo) >> _SH32
    u = mhi * xlo + t
    v = mlo * xhi + (u & _LO32)
    hi = mhi * xhi + (u >> _SH32) + (v >> _SH32)
    return hi, lo


def _round_keys(key0, key1):
    """The ten (k0, k1) round keys of the Weyl sequence, as uint64
    scalars (python-int arithmetic avoids numpy scalar-overflow noise)."""
    mask = (1 << 64) - 1
    k0, k1 = int(key0) & mask, int(key1) & mask
    keys = []
    for _ in range(10):
        keys.append((np.uint64(k0), np.uint64(k1)))
        k0 = (k0 + 0x9E3779B97F4A7C15) & mask
        k1 = (k1 + 0xBB67AE8584CAA73B) & mask
    return keys


def philox_blocks(c0, c1, c2, c3, key0, key1):
    """Philox4x64-10 over vectors of counters; returns 4 uint64 arrays."""
    x0 = np.asarray(c0, dtype=np.uint64).copy()
    x1 = np.broadcast_to(np.asarray(c1, dtype=np.uint64), x0.shape).copy()
    x2 = np.broadcast_to(np.asarray(c2, dtype=np.uint64), x0.shape).copy()
    x3 = np.broadcast_to(np.asarray(c3, dtype=np.uint64), x0.shape).copy()
    for k0, k1 in _round_keys(key0, key1):
        h0, l0 = _mulhilo(_M0, x0)
        h1, l1 = _mulhilo(_M1, x2)
        x0 = h1 ^ x1 ^ k0
        x1 = l1
        x2 = h0 ^ x3 ^ k1
        x3 = l0
    return x0, x1, x2, x3


def philox_raw(key0, key1, id1, id2, id3, block0, nblocks):
    """Blocks block0..block0+nblocks-1 as a (nblocks, 4) uint64 array."""
    c0 = np.arange(block0 + 1, block0 + 1 + nblocks, dtype=np.uint64)
    w0, w1, w2, w3 = philox_blocks(
        c0, np.uint64(id1), np.uint64(id2), np.uint64(id3), key0, key1
    )
    return np.stack([w0, w1, w2, w3], axis=1)


def _u01(words):
    return (words >> _SH11).astype(np.float64) * _U53


def _uopen(words):
    return ((words >> _SH11).astype(np.float64) + 0.5) * _U53


def _grr(x, d, a, u):
    """Vectorized generalized randomized response on categories 0..d-1."""
    if a >= 1.0:
        return x.copy()
    r = (u - a) / (1.0 - a)
    j = np.minimum((r * (d - 1)).astype(np.int64), d - 2)
    other = np.where(j < x, j, j + 1)
    return np.where(u < a, x, other)


def _laplace(scale, u):
    """Inverse-CDF Laplace draws; ``u`` in (0, 1), ``scale`` broadcastable."""
    c = u - 0.5
    return -scale * np.sign(c) * np.log1p(-2.0 * np.abs(c))


def _apply_r(g, v, d, a, b, w0, w1, w2):
    g2 = _grr(g, d, a, _u01(w0))
    v_eff = np.where(g2 == g, v, 0.0)
    bit = (_u01(w1) < (1.0 + v_eff) * 0.5).astype(np.int64)
    bit = _grr(bit, 2, b, _u01(w2))
    return g2, 2.0 * bit - 1.0


def _apply_l(g, v, d, a, scale_keep, scale_flip, w0, w1):
    g2 = _grr(g, d, a, _u01(w0))
    kept = g2 == g
    scale = np.where(kept, scale_keep, scale_flip)
    return g2, np.where(kept, v, 0.0) + _laplace(scale, _uopen(w1))


def _row_words(n, nwords, key0, key1, run, start_row):
    c0 = np.arange(start_row + 1, start_row + 1 + n, dtype=np.uint64)
    words = philox_blocks(c0, np.uint64(0), np.uint64(run), np.uint64(0), key0, key1)
    return words[:nwords]


def perturb_r_batch(groups, values, d, a, b, key0, key1, run=0, start_row=0):
    groups = np.ascontiguousarray(groups, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    w0, w1, w2 = _row_words(len(groups), 3, key0, key1, run, start_row)
    return _apply_r(groups, values, d, a, b, w0, w1, w2)


def perturb_l_batch(
    groups, values, d, a, scale_keep, scale_flip, key0, key1, run=0, start_row=0
):
    groups = np.ascontiguousarray(groups, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    w0, w1 = _row_words(len(groups), 2, key0, key1, run, start_row)
    return _apply_l(groups, values, d, a, scale_keep, scale_flip, w0, w1)


def _run_sums(groups, values, nwords, apply_fn, key0, key1, run0, nruns):
    K = len(groups)
    counts = np.zeros((nruns, 2), dtype=np.int64)
    sums = np.zeros((nruns, 2), dtype=np.float64)
    if K == 0 or nruns == 0:
        return counts, sums
    chunk = max(1, _CHUNK // K)
    row_c0 = np.arange(1, K + 1, dtype=np.uint64)
    for lo in range(0, nruns, chunk):
        hi = min(lo + chunk, nruns)
        m = hi - lo
        c0 = np.tile(row_c0, m)
        c2 = np.repeat(np.arange(run0 + lo, run0 + hi, dtype=np.uint64), K)
        words = philox_blocks(c0, np.uint64(0), c2, np.uint64(0), key0, key1)
        g = np.tile(groups, m)
        v = np.tile(values, m)
        out_g, out_v = apply_fn(g, v, *words[:nwords])
        out_g = out_g.reshape(m, K)
        out_v = out_v.reshape(m, K)
        for grp in (0, 1):
            mask = out_g == grp
            counts[lo:hi, grp] = mask.sum(axis=1)
            sums[lo:hi, grp] = np.where(mask, out_v, 0.0).sum(axis=1)
    return counts, sums


def run_sums_r(groups, values, d, a, b, key0, key1, run0, nruns):
    """Per-run counts and value sums for groups {0, 1} under repeated
    application of the discretizing mechanism."""
    groups = np.ascontiguousarray(groups, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)

    def apply_fn(g, v, w0, w1, w2):
        return _apply_r(g, v, d, a, b, w0, w1, w2)

    return _run_sums(groups, values, 3, apply_fn, key0, key1, run0, nruns)


def run_sums_l(groups, values, d, a, scale_keep, scale_flip, key0, key1, run0, nruns):
    """Per-run counts and value sums for groups {0, 1} under repeated
    application of the Laplace-noise mechanism."""
    groups = np.ascontiguousarray(groups, dtype=np.int64)
    values = np.ascontiguousarray(values, dtype=np.float64)

    def apply_fn(g, v, w0, w1):
        return _apply_l(g, v, d, a, scale_keep, scale_flip, w0, w1)

    return _run_sums(groups, values, 2, apply_fn, key0, key1, run0, nruns)


def resample_indices(m, n, key0, key1, start_row=0):
    """n draws with replacement from range(m), one block per row."""
    w0 = _row_words(n, 1, key0, key1, 0, start_row)[0]
    idx = (_u01(w0) * m).astype(np.int64)
    return np.minimum(idx, m - 1)

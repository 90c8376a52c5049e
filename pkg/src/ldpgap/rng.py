"""Deterministic counter-based random streams.

Every random draw in this package comes from the Philox4x64-10 block
cipher applied to a (counter, key) pair, so a draw is a pure function of
(seed, tag, substream ids, position). Streams can therefore be replayed,
split across clients/runs without coordination, and evaluated in any
order or thread layout with bit-identical results.

Conventions shared by the scalar API here and the vectorized kernels in
:mod:`ldpgap.backends`:

* key   = (seed, tag) -- the tag namespaces independent uses of one seed.
* counter = (block + 1, id1, id2, id3) -- block 0 of a stream uses low
  counter word 1, which matches ``numpy.random.Philox(counter=(0, id1,
  id2, id3))`` emitting blocks 1, 2, ... after its internal pre-increment.
* one block yields four 64-bit words; a composed mechanism consumes one
  whole block per record so scalar replay and batch kernels agree.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_M0 = 0xD2E7470EE14C6C93
_M1 = 0xCA5A826395121157
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B

# 2**-53; (word >> 11) * _U53 is the usual 53-bit uniform in [0, 1)
_U53 = 1.0 / (1 << 53)

# key tags: independent namespaces for one user-facing seed
TAG_USER = 0
TAG_PERTURB = 1
TAG_GENERATE = 2
TAG_DERIVE = 3


def philox4x64(counter, key):
    """One raw Philox4x64-10 block: 4 uint64 words for (counter, key).

    Reference implementation used by the scalar Stream API and as the
    ground truth the compiled kernels are tested against.
    """
    c0, c1, c2, c3 = (c & _MASK64 for c in counter)
    k0, k1 = key[0] & _MASK64, key[1] & _MASK64
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> 64) ^ c1 ^ k0,
            p1 & _MASK64,
            ((p0 >> 64) & _MASK64) ^ c3 ^ k1,
            p0 & _MASK64,
        )
        k0 = (k0 + _W0) & _MASK64
        k1 = (k1 + _W1) & _MASK64
    return c0, c1, c2, c3


def _check_u64(name, value):
    if not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if not 0 <= value < (1 << 64):
        raise ValueError(f"{name} must be in [0, 2**64), got {value}")
    return int(value)


def uniform_from_word(word):
    """Map a 64-bit word to a uniform double in [0, 1)."""
    return (word >> 11) * _U53


def open_uniform_from_word(word):
    """Map a 64-bit word to a uniform double in the open interval (0, 1).

    Used for inverse-CDF sampling where an exact 0 (or 1) would hit a
    log singularity.
    """
    return ((word >> 11) + 0.5) * _U53


class Stream:
    """A replayable uniform stream addressed by (seed, tag, ids).

    The cursor walks 4-word blocks; ``uniform()`` consumes one word at a
    time while ``next_block()`` always starts at a block boundary, which
    is how composed mechanisms keep one-record-per-block alignment.
    """

    __slots__ = ("seed", "tag", "ids", "_block", "_word", "_cache")

    def __init__(self, seed, tag=TAG_USER, ids=(0, 0, 0)):
        self.seed = _check_u64("seed", seed)
        self.tag = _check_u64("tag", tag)
        ids = tuple(ids)
        if len(ids) > 3:
            raise ValueError("at most 3 substream ids")
        ids = ids + (0,) * (3 - len(ids))
        self.ids = tuple(_check_u64("substream id", i) for i in ids)
        self._block = 0
        self._word = 0
        self._cache = None

    def substream(self, *ids):
        """Fresh stream with the same seed/tag and new substream ids."""
        return Stream(self.seed, self.tag, ids)

    def clone(self):
        """Copy of this stream including its cursor position."""
        s = Stream(self.seed, self.tag, self.ids)
        s._block, s._word, s._cache = self._block, self._word, self._cache
        return s

    @property
    def position(self):
        """(block, word) cursor, mostly for tests and diagnostics."""
        return (self._block, self._word)

    def _fetch(self, block):
        if self._cache is None or self._cache[0] != block:
            words = philox4x64(
                ((block + 1) & _MASK64, *self.ids), (self.seed, self.tag)
            )
            self._cache = (block, words)
        return self._cache[1]

    def next_word(self):
        """Next raw 64-bit word."""
        words = self._fetch(self._block)
        w = words[self._word]
        self._word += 1
        if self._word == 4:
            self._word = 0
            self._block += 1
        return w

    def next_block(self):
        """Four raw words of the next unconsumed block (aligns first)."""
        if self._word != 0:
            self._word = 0
            self._block += 1
        words = self._fetch(self._block)
        self._block += 1
        return words

    def uniform(self):
        """Uniform double in [0, 1)."""
        return uniform_from_word(self.next_word())

    def uniform_open(self):
        """Uniform double in (0, 1)."""
        return open_uniform_from_word(self.next_word())

    def uniforms(self, n):
        """Vector of the next ``n`` uniforms, identical to n calls of
        ``uniform()`` but generated via numpy's Philox in bulk."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        out = np.empty(n, dtype=np.float64)
        filled = 0
        # leading partial block stays on the scalar path
        while filled < n and self._word != 0:
            out[filled] = self.uniform()
            filled += 1
        remaining = n - filled
        if remaining == 0:
            return out
        nblocks = remaining // 4
        if nblocks:
            words = raw_blocks(
                self.seed, self.tag, self.ids, self._block, nblocks
            ).ravel()
            out[filled : filled + 4 * nblocks] = (
                (words >> np.uint64(11)).astype(np.float64) * _U53
            )
            filled += 4 * nblocks
            self._block += nblocks
        while filled < n:
            out[filled] = self.uniform()
            filled += 1
        return out


def raw_blocks(seed, tag, ids, block0, nblocks):
    """uint64 array of shape (nblocks, 4): blocks block0..block0+nblocks-1.

    Bulk variant of ``Stream._fetch`` backed by numpy's Philox bit
    generator (same algorithm, same counter layout).
    """
    ids = tuple(ids) + (0,) * (3 - len(ids))
    counter = np.array([block0, *ids], dtype=np.uint64)
    key = np.array([seed, tag], dtype=np.uint64)
    bg = np.random.Philox(counter=counter, key=key)
    return bg.random_raw(4 * nblocks).reshape(nblocks, 4)


def perturb_stream(seed, run=0):
    """Stream a mechanism walks record-by-record for a given run index.

    Record ``i`` of the run consumes block ``i``, matching the batch
    kernels' layout exactly.
    """
    return Stream(seed, TAG_PERTURB, (0, run, 0))


def generator_stream(seed):
    """Stream used by population generation (one block per client)."""
    return Stream(seed, TAG_GENERATE)


def derive_seed(seed, index):
    """Stable 64-bit sub-seed for independent experiment rows."""
    return philox4x64((index + 1, 0, 0, 0), (seed, TAG_DERIVE))[0]

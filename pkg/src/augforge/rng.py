"""Seeded random streams: SplitMix64 seeding plus xoshiro256** generation.

Both generators are fixed bit-for-bit so a given seed yields the same
sequence everywhere. Scalar draws run in Python; bulk draws go through a
numba kernel that advances the exact same state.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from . import _kernels

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_TWO_POW_53_INV = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 output finalizer (a bijection on 64-bit integers)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step. Returns ``(new_state, output)``."""
    state = (state + GOLDEN_GAMMA) & MASK64
    return state, mix64(state)


def parse_seed(text: str | int) -> int:
    """Accept a decimal or ``0x``-prefixed hex seed and check it fits in 64 bits."""
    if isinstance(text, int):
        value = text
    else:
        s = text.strip().lower()
        try:
            value = int(s, 16) if s.startswith("0x") else int(s, 10)
        except ValueError:
            raise ValueError(f"not a valid seed: {text!r}") from None
    if not 0 <= value <= MASK64:
        raise ValueError(f"seed out of 64-bit range: {text!r}")
    return value


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class RandomStream:
    """xoshiro256** stream seeded from a 64-bit integer via SplitMix64.

    Streams are single-owner and not thread-safe; derive one per job.
    """

    __slots__ = ("origin_seed", "_s")

    def __init__(self, seed: int):
        self.origin_seed = seed & MASK64
        sm = self.origin_seed
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self._s = s

    @property
    def state(self) -> tuple[int, int, int, int]:
        return tuple(self._s)

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _TWO_POW_53_INV

    def uniform(self, lo: float, hi: float) -> float:
        # zero-width ranges return lo exactly
        return lo + (hi - lo) * self.random()

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def u64_array(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint64)
        if n == 0:
            return out
        with self._kernel_state() as st:
            _kernels.fill_u64(st, out)
        return out

    def random_array(self, n: int) -> np.ndarray:
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * _TWO_POW_53_INV

    def byte_array(self, n: int) -> np.ndarray:
        """Uniform integers in [0, 255], one 64-bit draw each (top 8 bits)."""
        return (self.u64_array(n) >> np.uint64(56)).astype(np.uint8)

    def normal_array(self, n: int) -> np.ndarray:
        """Standard normals by Box-Muller over consecutive uniform pairs.

        Pair ``(u1, u2)`` yields ``r*cos(2*pi*u2)`` then ``r*sin(2*pi*u2)``
        with ``r = sqrt(-2*ln(1 - u1))``. An odd ``n`` discards the last sine.
        """
        out = np.empty(n, dtype=np.float64)
        with self._kernel_state() as st:
            _kernels.fill_normal(st, out)
        return out

    @contextmanager
    def _kernel_state(self):
        """Lend the state to a compiled kernel as a uint64 array, then read it back."""
        st = np.array(self._s, dtype=np.uint64)
        yield st
        self._s = [int(v) for v in st]


def derive_seed(master: int, source_index: int, technique_code: int, replicate: int) -> int:
    """Derive the per-job seed from the master seed and the job coordinates.

    The first word is the source index; the second packs the 16-bit
    technique code above a 48-bit replicate number. Each word is XORed in
    and followed by a full SplitMix64 step.
    """
    if not 0 <= technique_code <= 0xFFFF:
        raise ValueError("technique code must fit in 16 bits")
    if not 0 <= replicate < (1 << 48):
        raise ValueError("replicate out of range")
    word1 = source_index & MASK64
    word2 = (technique_code << 48) | replicate
    _, h = splitmix64((master & MASK64) ^ word1)
    _, h = splitmix64(h ^ word2)
    return h

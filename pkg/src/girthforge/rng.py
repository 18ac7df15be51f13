"""Reproducible 64-bit random numbers.

All randomness in girthforge comes from xoshiro256** (Blackman and Vigna),
seeded by expanding a single 64-bit seed through splitmix64.  The generator
state is a ``uint64[4]`` numpy array so the same stream can be consumed from
compiled kernels and from Python.

Algorithm, for reference implementations in other languages::

    splitmix64(x):  x += 0x9E3779B97F4A7C15
                    z = x
                    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
                    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                    return z ^ (z >> 31)

    seed(s):        x = s; state[i] = splitmix64(x) for i = 0..3 (x advancing)

    next():         result = rotl(s1 * 5, 7) * 9
                    t = s1 << 17
                    s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
                    s2 ^= t;  s3 = rotl(s3, 45)

    below(m):       threshold = (2**64 - m) mod m
                    draw r = next() until r >= threshold; return r mod m

    uniform():      (next() >> 11) * 2**-53
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U64 = np.uint64
_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> tuple[int, int]:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, z ^ (z >> 31)


def seed_state(seed: int) -> np.ndarray:
    """Expand a 64-bit seed into a fresh xoshiro256** state."""
    x = int(seed) & _MASK
    words = []
    for _ in range(4):
        x, z = _splitmix64(x)
        words.append(z)
    return np.array(words, dtype=np.uint64)


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << _U64(k)) | (x >> _U64(64 - k))


@njit(cache=True)
def next_u64(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    result = _rotl(s1 * _U64(5), 7) * _U64(9)
    t = s1 << _U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return result


@njit(cache=True)
def below(s, m):
    """Unbiased integer in ``[0, m)``; ``m`` must be positive."""
    mm = _U64(m)
    threshold = (_U64(0) - mm) % mm
    while True:
        r = next_u64(s)
        if r >= threshold:
            return np.int64(r % mm)


@njit(cache=True)
def uniform(s):
    return np.float64(next_u64(s) >> _U64(11)) * (1.0 / 9007199254740992.0)


class Xoshiro256:
    """Thin Python handle around a xoshiro256** state array.

    >>> rng = Xoshiro256(7)
    >>> 0 <= rng.below(10) < 10
    True
    """

    def __init__(self, seed: int = 0, state: np.ndarray | None = None):
        self.seed = int(seed)
        self.state = seed_state(seed) if state is None else np.asarray(state, dtype=np.uint64).copy()

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def below(self, m: int) -> int:
        if m <= 0:
            raise ValueError(f"below() needs a positive bound, got {m}")
        return int(below(self.state, m))

    def uniform(self) -> float:
        return float(uniform(self.state))

    def spawn(self, salt: int) -> "Xoshiro256":
        """Independent stream derived from this generator's seed and ``salt``."""
        return Xoshiro256((self.seed * 0x9E3779B97F4A7C15 + salt) & _MASK)

    def copy(self) -> "Xoshiro256":
        return Xoshiro256(self.seed, state=self.state)

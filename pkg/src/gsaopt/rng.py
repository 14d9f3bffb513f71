"""Portable 64-bit generator used for shuffles and splits.

xoshiro256** seeded through SplitMix64, so a (seed, stream) pair gives the
same permutation in any language that implements the two reference
generators.  Stream keys: epoch ``e`` uses stream ``e``; the train/test
split uses :data:`SPLIT_STREAM`.
"""
from __future__ import annotations

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SPLIT_STREAM = 1 << 63


def splitmix64_mix(x: int) -> int:
    """SplitMix64 output function applied to ``x + golden``."""
    z = (x + GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    return splitmix64_mix((seed & MASK) ^ splitmix64_mix(stream & MASK))


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK


class Xoshiro256:
    """xoshiro256** with state filled from a SplitMix64 sequence."""

    def __init__(self, key: int):
        s = []
        x = key & MASK
        for _ in range(4):
            x = (x + GOLDEN) & MASK
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
            s.append(z ^ (z >> 31))
        self.s = s

    @classmethod
    def for_stream(cls, seed: int, stream: int) -> "Xoshiro256":
        return cls(stream_key(seed, stream))

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK, 7) * 9) & MASK
        t = (s1 << 17) & MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates: for i = n-1 .. 1 swap a[i] with a[below(i + 1)]."""
        a = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            a[i], a[j] = a[j], a[i]
        return a

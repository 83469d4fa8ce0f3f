"""Deterministic 64-bit random number generation.

Every random draw in this package flows through the generators defined
here, so a (parameters, seed) pair reproduces bit-identical results on any
machine, and the streams can be replicated from any language that
implements the same published constants:

* splitmix64 (Steele, Lea, Flood 2014) for seed expansion and mixing,
* xoshiro256** (Blackman, Vigna 2018) for the main streams.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

MASK64 = (1 << 64) - 1

# splitmix64 constants
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

# FNV-1a, used only to fold strings into seed material
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

T = TypeVar("T")


def mix64(x: int) -> int:
    """One splitmix64 step: advance state ``x`` by the golden gamma and scramble."""
    x = (x + _GOLDEN_GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * _MIX_A) & MASK64
    x = ((x ^ (x >> 27)) * _MIX_B) & MASK64
    return x ^ (x >> 31)


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def mix_parts(*parts: int | str) -> int:
    """Fold integers and strings into a single 64-bit seed.

    Each part is hashed (identity for ints, FNV-1a for strings) and chained
    through mix64, so distinct tuples produce independent seeds.
    """
    h = 0
    for part in parts:
        if isinstance(part, str):
            v = fnv1a64(part.encode("utf-8"))
        else:
            v = part & MASK64
        h = mix64(h ^ v)
    return h


def derive_subseed(base_seed: int, index: int) -> int:
    """Sub-seed for the ``index``-th item of a batch: mix64(base + index)."""
    return mix64((base_seed + index) & MASK64)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Rng:
    """xoshiro256** stream, state expanded from a 64-bit seed via splitmix64."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        sm = seed & MASK64
        state = []
        for _ in range(4):
            sm = (sm + _GOLDEN_GAMMA) & MASK64
            z = ((sm ^ (sm >> 30)) * _MIX_A) & MASK64
            z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
            state.append(z ^ (z >> 31))
        if not any(state):  # all-zero state is the one invalid seed
            state[0] = 1
        self._s0, self._s1, self._s2, self._s3 = state

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via the multiply-shift reduction."""
        if n <= 0:
            raise ValueError("n must be positive")
        return (self.next_u64() * n) >> 64

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in [a, b], inclusive."""
        if b < a:
            raise ValueError("empty range")
        return a + self.below(b - a + 1)

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.below(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

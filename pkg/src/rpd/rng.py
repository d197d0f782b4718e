"""SplitMix64 stream and the uniform block draw.

Pure integer arithmetic, so a seed yields the same block sequence on every
platform and in any language that implements SplitMix64.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def draw_block(self, p: int) -> int:
        """Uniform index in 1..p, rejection-sampled to remove modulo bias."""
        if p < 1:
            raise ValueError("p must be >= 1")
        limit = ((1 << 64) // p) * p
        while True:
            u = self.next_u64()
            if u < limit:
                return 1 + u % p


def draw_block(rng: SplitMix64, p: int) -> int:
    return rng.draw_block(p)

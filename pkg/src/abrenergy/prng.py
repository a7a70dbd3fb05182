"""Deterministic 64-bit linear congruential generator.

Pinned so that randomized traces are reproducible byte-for-byte across
platforms and releases; the standard library's generator is not part of
any stability contract.
"""

from __future__ import annotations

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    """state' = state * MULTIPLIER + INCREMENT (mod 2**64), seeded directly."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.state = seed & _MASK

    def next_uint64(self) -> int:
        self.state = (self.state * MULTIPLIER + INCREMENT) & _MASK
        return self.state

    def next_index(self, n: int) -> int:
        """Uniform index in [0, n) from the top 32 bits of the next state."""
        if n <= 0:
            raise ValueError(f"n must be positive, got {n}")
        top = self.next_uint64() >> 32
        return (n * top) >> 32

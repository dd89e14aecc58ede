"""64-bit linear congruential generator shared by the corpus builders.

state' = (A * state + C) mod 2^64 with Knuth's MMIX constants.  Draws use the
high 32 bits of the new state, so ports in other languages reproduce the
same corpus from the same seed.
"""

from __future__ import annotations

A = 6364136223846793005
C = 1442695040888963407
MASK = (1 << 64) - 1


class LCG:
    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u32(self) -> int:
        self.state = (A * self.state + C) & MASK
        return self.state >> 32

    def randrange(self, n: int) -> int:
        """Uniform-ish integer in [0, n); modulo reduction of a 32-bit draw."""
        if n <= 0:
            raise ValueError("empty range")
        return self.next_u32() % n

    def randint(self, lo: int, hi: int) -> int:
        return lo + self.randrange(hi - lo + 1)

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def fork(self) -> int:
        """A fresh 64-bit seed derived from two draws."""
        return (self.next_u32() << 32) | self.next_u32()

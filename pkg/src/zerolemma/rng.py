"""xoshiro256** seeded through splitmix64.

A fixed, documented algorithm so that campaigns can be reproduced by other
implementations from the same 64-bit seed.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

from gmpy2 import mpq

_M64 = (1 << 64) - 1
T = TypeVar("T")


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _M64


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return state, z ^ (z >> 31)


class Xoshiro256:
    def __init__(self, seed: int):
        sm = int(seed) & _M64
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self.s = s

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & _M64, 7) * 9) & _M64
        t = (s[1] << 17) & _M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] by rejection (no modulo bias)."""
        if hi < lo:
            raise ValueError("empty range")
        r = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % r)
        while True:
            x = self.next_u64()
            if x < limit:
                return lo + x % r

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice(self, items: Sequence[T]) -> T:
        return items[self.randint(0, len(items) - 1)]

    def rational(self, num_box: int, den_box: int = 1) -> mpq:
        return mpq(self.randint(-num_box, num_box), self.randint(1, den_box))

    def spawn(self) -> "Xoshiro256":
        """An independent child stream seeded from this one."""
        return Xoshiro256(self.next_u64())

    def numpy_seed(self) -> int:
        """A seed for numpy bulk sampling, drawn from this stream."""
        return self.next_u64()

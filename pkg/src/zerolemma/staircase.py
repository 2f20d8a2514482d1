"""Finite lower sets of N^g with a block structure, simplex staircases
W(delta, eps) = {alpha : sum_l |alpha_l| / delta_l < eps}, and their volumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np
from gmpy2 import mpq

from .exact import Q

MAX_MEMBERS = 10**7
MultiIndex = tuple[int, ...]


def _check_blocks(blocks: Sequence[int]) -> tuple[int, ...]:
    blocks = tuple(int(b) for b in blocks)
    if not blocks or any(b < 1 for b in blocks):
        raise ValueError("blocks must be positive integers")
    return blocks


def block_lengths(I: MultiIndex, blocks: Sequence[int]) -> tuple[int, ...]:
    """(t_1(I), ..., t_p(I)): the lengths of I restricted to each block."""
    out, pos = [], 0
    for b in blocks:
        out.append(sum(I[pos : pos + b]))
        pos += b
    return tuple(out)


def compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class Staircase:
    """A finite lower set of N^g; construction asserts the closure property."""

    blocks: tuple[int, ...]
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "blocks", _check_blocks(self.blocks))
        members = frozenset(tuple(int(a) for a in I) for I in self.members)
        object.__setattr__(self, "members", members)
        g = self.g
        for I in members:
            if len(I) != g or any(a < 0 for a in I):
                raise ValueError(f"{I} is not an index of N^{g}")
            for i, a in enumerate(I):
                if a and I[:i] + (a - 1,) + I[i + 1 :] not in members:
                    raise ValueError(f"not a lower set: {I} lacks its predecessor in coordinate {i}")

    @property
    def g(self) -> int:
        return sum(self.blocks)

    @classmethod
    def origin(cls, blocks: Sequence[int]) -> "Staircase":
        return cls(tuple(blocks), frozenset({(0,) * sum(blocks)}))

    @classmethod
    def closure(cls, blocks: Sequence[int], generators: Iterable[MultiIndex]) -> "Staircase":
        """Smallest lower set containing the generators."""
        out = set()
        for gen in generators:
            for I in product(*(range(a + 1) for a in gen)):
                out.add(I)
        return cls(tuple(blocks), frozenset(out))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, I) -> bool:
        return tuple(I) in self.members

    def __iter__(self):
        return iter(self.sorted())

    def sorted(self) -> list[MultiIndex]:
        return sorted(self.members, key=lambda I: (sum(I), tuple(-a for a in I)))

    def is_empty(self) -> bool:
        return not self.members

    def intersection(self, other: "Staircase") -> "Staircase":
        _same_shape(self, other)
        return Staircase(self.blocks, self.members & other.members)

    def to_json(self) -> dict:
        return {"blocks": list(self.blocks), "cardinality": len(self), "members": [list(I) for I in self.sorted()]}


def _same_shape(A: Staircase, B: Staircase) -> None:
    if A.blocks != B.blocks:
        raise ValueError(f"block structures differ: {A.blocks} vs {B.blocks}")


def minkowski_sum(A: Staircase, B: Staircase) -> Staircase:
    """{a + b}; the sum of two lower sets is again one (asserted by the constructor)."""
    _same_shape(A, B)
    return Staircase(A.blocks, frozenset(tuple(x + y for x, y in zip(a, b)) for a in A.members for b in B.members))


@dataclass(frozen=True)
class SimplexStaircase:
    """W(delta, eps) with one weight delta_l per block; the inequality is strict."""

    delta: tuple
    epsilon: mpq
    blocks: tuple[int, ...] = field(default=())

    def __post_init__(self):
        delta = tuple(Q(x) for x in self.delta)
        eps = Q(self.epsilon)
        blocks = self.blocks or (1,) * len(delta)
        blocks = _check_blocks(blocks)
        if len(blocks) != len(delta):
            raise ValueError("one delta per block is required")
        if any(x <= 0 for x in delta) or eps <= 0:
            raise ValueError("delta and epsilon must be positive")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "blocks", blocks)

    @property
    def g(self) -> int:
        return sum(self.blocks)

    def weight(self, I: MultiIndex) -> mpq:
        return sum((mpq(t) / d for t, d in zip(block_lengths(I, self.blocks), self.delta)), mpq(0))

    def __contains__(self, I) -> bool:
        return self.weight(tuple(I)) < self.epsilon

    def scaled(self, factor) -> "SimplexStaircase":
        return SimplexStaircase(self.delta, self.epsilon * Q(factor), self.blocks)

    def _length_tuples(self, cap: int) -> list[tuple[tuple[int, ...], int]]:
        """Admissible (t_1..t_p) with the number of members each contributes."""
        out: list[tuple[tuple[int, ...], int]] = []
        total = 0

        def rec(l: int, used: mpq, prefix: tuple[int, ...], count: int):
            nonlocal total
            if l == len(self.delta):
                out.append((prefix, count))
                total += count
                if total > cap:
                    raise OverflowError(
                        f"W(delta, eps) has more than {cap} members; lower epsilon or delta")
                return
            t = 0
            while used + mpq(t) / self.delta[l] < self.epsilon:
                rec(l + 1, used + mpq(t) / self.delta[l], prefix + (t,),
                    count * math.comb(t + self.blocks[l] - 1, self.blocks[l] - 1))
                t += 1

        rec(0, mpq(0), (), 1)
        return out

    def cardinality(self, cap: int = MAX_MEMBERS) -> int:
        return sum(c for _, c in self._length_tuples(cap))

    def enumerate(self, cap: int = MAX_MEMBERS) -> Staircase:
        members = set()
        for lengths, _ in self._length_tuples(cap):
            for parts in product(*(list(compositions(t, b)) for t, b in zip(lengths, self.blocks))):
                members.add(sum(parts, ()))
        return Staircase(self.blocks, frozenset(members))

    def to_json(self) -> dict:
        return {"delta": [str(x) for x in self.delta], "epsilon": str(self.epsilon), "blocks": list(self.blocks)}


@dataclass(frozen=True)
class Functionals:
    t: tuple[int, ...]
    H: int

    def to_json(self) -> dict:
        return {"t": list(self.t), "H": self.H}


def functionals(W: Staircase) -> Functionals:
    """t_l(W) = max block-l length, H(W) = max total length."""
    if W.is_empty():
        raise ValueError("functionals of the empty staircase")
    t = [0] * len(W.blocks)
    H = 0
    for I in W.members:
        lengths = block_lengths(I, W.blocks)
        if sum(lengths) != sum(I):
            raise AssertionError(f"block lengths of {I} do not add up")
        t = [max(a, b) for a, b in zip(t, lengths)]
        H = max(H, sum(I))
    return Functionals(tuple(t), H)


# ---------------------------------------------------------------- volumes


def _axis_deltas(W: SimplexStaircase, axes: Sequence[int]) -> list[mpq]:
    if not axes:
        raise ValueError("at least one axis is required")
    owner = [l for l, b in enumerate(W.blocks) for _ in range(b)]
    if len(set(axes)) != len(axes) or any(not 0 <= a < W.g for a in axes):
        raise ValueError(f"axes must be distinct coordinates in 0..{W.g - 1}")
    return [W.delta[owner[a]] for a in axes]


def multiplicity_volume(W: SimplexStaircase, axes: Sequence[int]) -> tuple[mpq, mpq]:
    """(volume, k! * volume) of {x in R_+^k : sum x_j / delta_block(j) < eps}."""
    deltas = _axis_deltas(W, axes)
    k = len(deltas)
    vol = W.epsilon**k
    for d in deltas:
        vol *= d
    vol /= math.factorial(k)
    return vol, vol * math.factorial(k)


def lattice_volume(W: SimplexStaircase, axes: Sequence[int], refinement: int = 64) -> float:
    """Midpoint rule on a refinement^(k-1) grid, the last axis integrated exactly.

    Counting whole cells along every axis leaves an O(1/refinement) boundary
    error (1.6% in two dimensions at 64), too coarse for a 1% comparison.
    """
    deltas = [float(Fraction(int(d.numerator), int(d.denominator))) for d in _axis_deltas(W, axes)]
    eps = float(Fraction(int(W.epsilon.numerator), int(W.epsilon.denominator)))
    k = len(deltas)
    if k > 5:
        raise ValueError("the lattice oracle is limited to five axes")
    steps = [eps * d / refinement for d in deltas]
    mids = (np.arange(refinement) + 0.5)
    # Weighted partial sums over the first k-1 axes, then count the last axis directly.
    partial = np.zeros(1)
    for j in range(k - 1):
        partial = (partial[:, None] + (mids * steps[j] / deltas[j])[None, :]).ravel()
        partial = partial[partial < eps]
    lengths = np.clip(eps - partial, 0, None) * deltas[-1]
    return float(lengths.sum()) * float(np.prod(steps[:-1]))


# ---------------------------------------------------------------- sum identity


@dataclass
class SumIdentityReport:
    """Both inclusions between {0} + W + ... + W (``copies`` terms) and W(delta, copies*eps)."""

    staircase: SimplexStaircase
    copies: int
    sum_size: int
    target_size: int
    sum_minus_target: list
    target_minus_sum: list

    @property
    def sum_in_target(self) -> bool:
        return not self.sum_minus_target

    @property
    def target_in_sum(self) -> bool:
        return not self.target_minus_sum

    def to_json(self, limit: int = 50) -> dict:
        return {
            "staircase": self.staircase.to_json(),
            "copies": self.copies,
            "sum_size": self.sum_size,
            "target_size": self.target_size,
            "sum_in_target": self.sum_in_target,
            "target_in_sum": self.target_in_sum,
            "sum_minus_target": [list(I) for I in self.sum_minus_target[:limit]],
            "target_minus_sum": [list(I) for I in self.target_minus_sum[:limit]],
        }


def sum_identity_report(W: SimplexStaircase, copies: int | None = None) -> SumIdentityReport:
    copies = W.g if copies is None else copies
    if copies < 1:
        raise ValueError("copies must be positive")
    base = W.enumerate()
    total = Staircase.origin(W.blocks)
    for _ in range(copies):
        total = minkowski_sum(total, base)
    target = W.scaled(copies).enumerate()
    key = lambda I: (sum(I), I)
    return SumIdentityReport(
        W, copies, len(total), len(target),
        sorted(total.members - target.members, key=key),
        sorted(target.members - total.members, key=key),
    )

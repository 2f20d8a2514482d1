"""Sparse multivariate polynomials over Q, localizations by a power of one
polynomial, and truncated multivariate power series.

Exponent vectors are plain tuples.  Multiplication packs them into single
integers (16 bits per variable) so that monomial products become integer
additions; with the total-degree cap of 64 no field can overflow.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from gmpy2 import mpq

from .exact import Q, Place, Rational, RationalLike, abs_v, format_rational

MAX_ARITY = 16
MAX_DEGREE = 64
NEG_INF = float("-inf")
_FIELD = 16
_MASK = (1 << _FIELD) - 1

MultiIndex = tuple[int, ...]


# ---------------------------------------------------------------- multi-indices


def length(I: Sequence[int]) -> int:
    """|I|, the sum of the entries."""
    return sum(I)


def mi_factorial(I: Sequence[int]) -> int:
    return math.prod(math.factorial(i) for i in I)


def mi_binom(J: Sequence[int], I: Sequence[int]) -> int:
    """prod binom(J_i, I_i); zero as soon as some I_i > J_i."""
    out = 1
    for j, i in zip(J, I):
        if i > j:
            return 0
        out *= math.comb(j, i)
    return out


def mi_add(I: Sequence[int], J: Sequence[int]) -> MultiIndex:
    return tuple(a + b for a, b in zip(I, J))


def mi_sub(I: Sequence[int], J: Sequence[int]) -> MultiIndex:
    return tuple(a - b for a, b in zip(I, J))


def mi_le(I: Sequence[int], J: Sequence[int]) -> bool:
    return all(a <= b for a, b in zip(I, J))


def unit(n: int, k: int) -> MultiIndex:
    return tuple(1 if i == k else 0 for i in range(n))


def indices_of_length(n: int, m: int) -> Iterator[MultiIndex]:
    """All I in N^n with |I| = m, in graded-lex descending order."""
    if n == 0:
        if m == 0:
            yield ()
        return
    for first in range(m, -1, -1):
        for rest in indices_of_length(n - 1, m - first):
            yield (first,) + rest


def indices_up_to(n: int, m: int) -> Iterator[MultiIndex]:
    """All I with |I| <= m, by increasing length."""
    for k in range(m + 1):
        yield from indices_of_length(n, k)


def indices_below(J: Sequence[int]) -> Iterator[MultiIndex]:
    """All I <= J componentwise."""
    return itertools.product(*(range(j + 1) for j in J))


def grlex_key(e: Sequence[int]):
    return (sum(e), tuple(e))


# ---------------------------------------------------------------- polynomials


class SparsePolynomial:
    """An immutable polynomial: ordered variable names and a map exponent -> coefficient."""

    __slots__ = ("vars", "terms", "_packed", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Sequence[int], RationalLike] | None = None):
        variables = tuple(variables)
        if len(variables) > MAX_ARITY:
            raise ValueError(f"arity {len(variables)} exceeds the cap of {MAX_ARITY}")
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables}")
        clean: dict[MultiIndex, mpq] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != len(variables):
                raise ValueError(f"exponent {e} does not match {len(variables)} variables")
            if any(x < 0 for x in e):
                raise ValueError(f"negative exponent {e}")
            c = Q(c)
            if c:
                clean[e] = clean.get(e, mpq(0)) + c
        clean = {e: c for e, c in clean.items() if c}
        if clean and max(map(sum, clean)) > MAX_DEGREE:
            raise ValueError(f"total degree exceeds the cap of {MAX_DEGREE}")
        self.vars = variables
        self.terms = clean
        self._packed = None
        self._hash = None

    @classmethod
    def _raw(cls, variables: tuple[str, ...], terms: dict[MultiIndex, mpq]) -> "SparsePolynomial":
        # Trusted constructor: terms already canonical (nonzero mpq, right arity).
        if terms and max(map(sum, terms)) > MAX_DEGREE:
            raise ValueError(f"total degree exceeds the cap of {MAX_DEGREE}")
        obj = object.__new__(cls)
        obj.vars = variables
        obj.terms = terms
        obj._packed = None
        obj._hash = None
        return obj

    # -- constructors
    @classmethod
    def zero(cls, variables: Sequence[str]) -> "SparsePolynomial":
        return cls(variables)

    @classmethod
    def constant(cls, variables: Sequence[str], c: RationalLike) -> "SparsePolynomial":
        return cls(variables, {(0,) * len(tuple(variables)): c})

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "SparsePolynomial":
        variables = tuple(variables)
        return cls(variables, {unit(len(variables), variables.index(name)): 1})

    @classmethod
    def generators(cls, variables: Sequence[str]) -> list["SparsePolynomial"]:
        return [cls.variable(variables, v) for v in variables]

    # -- basic queries
    @property
    def nvars(self) -> int:
        return len(self.vars)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def total_degree(self):
        """Max |exponent|; -inf for the zero polynomial."""
        if not self.terms:
            return NEG_INF
        return max(map(sum, self.terms))

    def degree_in(self, k: int):
        if not self.terms:
            return NEG_INF
        return max(e[k] for e in self.terms)

    def coefficient(self, e: Sequence[int]) -> mpq:
        return self.terms.get(tuple(e), mpq(0))

    def coefficients(self) -> list[mpq]:
        return [self.terms[e] for e in self.sorted_exponents()]

    def sorted_exponents(self) -> list[MultiIndex]:
        """Exponents in graded-lex order, leading term first."""
        return sorted(self.terms, key=grlex_key, reverse=True)

    def leading_term(self) -> tuple[MultiIndex, mpq]:
        if not self.terms:
            raise ValueError("the zero polynomial has no leading term")
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def is_homogeneous(self, blocks: Sequence[Sequence[int]] | None = None) -> bool:
        """Homogeneous overall, or in each block of variable positions."""
        if not self.terms:
            return True
        blocks = blocks or [range(self.nvars)]
        for block in blocks:
            degs = {sum(e[i] for i in block) for e in self.terms}
            if len(degs) > 1:
                return False
        return True

    def homogeneous_part(self, d: int) -> "SparsePolynomial":
        return SparsePolynomial._raw(self.vars, {e: c for e, c in self.terms.items() if sum(e) == d})

    # -- arithmetic
    def _check(self, other: "SparsePolynomial") -> None:
        if other.vars != self.vars:
            raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")

    def _coerce(self, other) -> "SparsePolynomial":
        if isinstance(other, SparsePolynomial):
            self._check(other)
            return other
        return SparsePolynomial.constant(self.vars, other)

    def __add__(self, other) -> "SparsePolynomial":
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            self, other = other, self
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return SparsePolynomial._raw(self.vars, out)

    __radd__ = __add__

    def __neg__(self) -> "SparsePolynomial":
        return SparsePolynomial._raw(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "SparsePolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SparsePolynomial":
        return self._coerce(other) - self

    def scale(self, c: RationalLike) -> "SparsePolynomial":
        c = Q(c)
        if not c:
            return SparsePolynomial._raw(self.vars, {})
        return SparsePolynomial._raw(self.vars, {e: c * v for e, v in self.terms.items()})

    def _pack(self) -> list[tuple[int, mpq]]:
        if self._packed is None:
            self._packed = [
                (sum(x << (_FIELD * i) for i, x in enumerate(e)), c) for e, c in self.terms.items()
            ]
        return self._packed

    def _unpack(self, k: int) -> MultiIndex:
        return tuple((k >> (_FIELD * i)) & _MASK for i in range(self.nvars))

    def __mul__(self, other) -> "SparsePolynomial":
        if not isinstance(other, SparsePolynomial):
            return self.scale(other)
        self._check(other)
        if not self.terms or not other.terms:
            return SparsePolynomial._raw(self.vars, {})
        a, b = self._pack(), other._pack()
        if len(a) < len(b):
            a, b = b, a
        acc: dict[int, mpq] = {}
        get = acc.get
        for kb, cb in b:
            for ka, ca in a:
                k = ka + kb
                acc[k] = get(k, 0) + ca * cb
        unpack = self._unpack
        return SparsePolynomial._raw(self.vars, {unpack(k): c for k, c in acc.items() if c})

    def __rmul__(self, other) -> "SparsePolynomial":
        return self.scale(other)

    def __pow__(self, k: int) -> "SparsePolynomial":
        if k < 0:
            raise ValueError("negative power")
        result = SparsePolynomial.constant(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, SparsePolynomial):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Rational)):
            return self.terms == ({(0,) * self.nvars: Q(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # -- calculus and evaluation
    def diff(self, k: int, times: int = 1) -> "SparsePolynomial":
        """Ordinary partial derivative in variable position k."""
        out = {}
        for e, c in self.terms.items():
            if e[k] >= times:
                f = list(e)
                f[k] -= times
                out[tuple(f)] = c * math.perm(e[k], times)
        return SparsePolynomial._raw(self.vars, out)

    def evaluate(self, point: Sequence[RationalLike]) -> mpq:
        """Exact value at a rational point."""
        if len(point) != self.nvars:
            raise ValueError("point has the wrong dimension")
        pt = [Q(x) for x in point]
        powers: list[dict[int, mpq]] = [{} for _ in pt]
        total = mpq(0)
        for e, c in self.terms.items():
            term = c
            for i, k in enumerate(e):
                if k:
                    pk = powers[i].get(k)
                    if pk is None:
                        pk = powers[i][k] = pt[i] ** k
                    term *= pk
            total += term
        return total

    def evaluate_numeric(self, point: Sequence, convert: Callable = float):
        """Evaluate at numeric values (floats, complex, mpmath or numpy arrays)."""
        total = 0
        for e, c in self.terms.items():
            term = convert(c)
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    def with_vars(self, variables: Sequence[str]) -> "SparsePolynomial":
        """Rename variables positionally."""
        variables = tuple(variables)
        if len(variables) != self.nvars:
            raise ValueError("renaming must keep the arity")
        return SparsePolynomial._raw(variables, dict(self.terms))

    def embed(self, variables: Sequence[str]) -> "SparsePolynomial":
        """View as a polynomial in a superset of variables (matched by name)."""
        variables = tuple(variables)
        pos = [variables.index(v) for v in self.vars]
        out = {}
        for e, c in self.terms.items():
            f = [0] * len(variables)
            for i, k in zip(pos, e):
                f[i] = k
            out[tuple(f)] = c
        return SparsePolynomial._raw(variables, out)

    def content_denominator(self) -> int:
        return math.lcm(*(int(c.denominator) for c in self.terms.values())) if self.terms else 1

    def primitive_integer(self) -> "SparsePolynomial":
        """The unique positive-leading integer multiple with coprime coefficients."""
        if not self.terms:
            return self
        den = self.content_denominator()
        nums = [int(c * den) for c in self.terms.values()]
        g = math.gcd(*nums)
        sign = 1 if self.leading_term()[1] > 0 else -1
        return self.scale(mpq(sign * den, g))

    # -- display and wire format
    def __repr__(self) -> str:
        return f"SparsePolynomial({self.vars}, {self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in self.sorted_exponents():
            c = self.terms[e]
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            mag = abs(c)
            if not mono:
                body = format_rational(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{format_rational(mag)}*{mono}"
            parts.append(("-" if c < 0 else "+", body))
        head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        return head + "".join(f" {s} {b}" for s, b in parts[1:])

    def to_json(self) -> dict:
        return {
            "vars": list(self.vars),
            "terms": [
                {"exp": list(e), "coef": format_rational(self.terms[e])} for e in self.sorted_exponents()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SparsePolynomial":
        try:
            variables = data["vars"]
            raw = data["terms"]
        except (KeyError, TypeError) as exc:
            raise ValueError("polynomial JSON needs 'vars' and 'terms'") from exc
        terms: dict[MultiIndex, mpq] = {}
        for t in raw:
            e = tuple(t["exp"])
            if e in terms:
                raise ValueError(f"duplicate exponent {list(e)} in polynomial JSON")
            terms[e] = Q(str(t["coef"]))
        return cls(variables, terms)


Scalar = Union[int, Rational]


def divided_derivative(P: SparsePolynomial, I: Sequence[int]) -> SparsePolynomial:
    """D^I P = (1/I!) d^|I| P / dX^I, via X^J -> binom(J, I) X^(J-I)."""
    I = tuple(I)
    if len(I) != P.nvars:
        raise ValueError(f"multi-index {I} does not match {P.nvars} variables")
    out = {}
    for e, c in P.terms.items():
        b = mi_binom(e, I)
        if b:
            out[mi_sub(e, I)] = c * b
    return SparsePolynomial._raw(P.vars, out)


def length_v(P: SparsePolynomial, v: Place) -> mpq:
    """Sum of |c|_v over the coefficients (exact)."""
    return sum((abs_v(c, v) for c in P.terms.values()), mpq(0))


def l2_norm_squared(P: SparsePolynomial) -> mpq:
    return sum((c * c for c in P.terms.values()), mpq(0))


# ---------------------------------------------------------------- localization


class Localization:
    """The ring S^-1 B with S the powers of one fixed nonzero polynomial ``den``."""

    def __init__(self, den: SparsePolynomial):
        if den.is_zero():
            raise ValueError("cannot localize at zero")
        self.den = den
        self._powers = [SparsePolynomial.constant(den.vars, 1), den]

    def power(self, k: int) -> SparsePolynomial:
        while len(self._powers) <= k:
            self._powers.append(self._powers[-1] * self.den)
        return self._powers[k]

    def element(self, num: SparsePolynomial, k: int = 0) -> "LocalizedPolynomial":
        return LocalizedPolynomial(num, k, self)

    def exact_quotient(self, num: SparsePolynomial) -> SparsePolynomial | None:
        """num / den if the division is exact in B, else None."""
        return exact_division(num, self.den)


class LocalizedPolynomial:
    """num / den^k for the contextual denominator of its ``Localization``."""

    __slots__ = ("num", "k", "ring")

    def __init__(self, num: SparsePolynomial, k: int, ring: Localization):
        if k < 0:
            raise ValueError("denominator power must be non-negative")
        self.num = num
        self.k = k
        self.ring = ring

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def _lift(self, other) -> "LocalizedPolynomial":
        if isinstance(other, LocalizedPolynomial):
            return other
        if isinstance(other, SparsePolynomial):
            return LocalizedPolynomial(other, 0, self.ring)
        return LocalizedPolynomial(SparsePolynomial.constant(self.num.vars, other), 0, self.ring)

    def __add__(self, other) -> "LocalizedPolynomial":
        other = self._lift(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        k = max(self.k, other.k)
        a = self.num if self.k == k else self.num * self.ring.power(k - self.k)
        b = other.num if other.k == k else other.num * self.ring.power(k - other.k)
        return LocalizedPolynomial(a + b, k, self.ring)

    __radd__ = __add__

    def __neg__(self) -> "LocalizedPolynomial":
        return LocalizedPolynomial(-self.num, self.k, self.ring)

    def __sub__(self, other) -> "LocalizedPolynomial":
        return self + (-self._lift(other))

    def __mul__(self, other) -> "LocalizedPolynomial":
        if isinstance(other, (int, Rational)):
            return LocalizedPolynomial(self.num.scale(other), self.k, self.ring)
        other = self._lift(other)
        return LocalizedPolynomial(self.num * other.num, self.k + other.k, self.ring)

    __rmul__ = __mul__

    def divide_by_den(self) -> "LocalizedPolynomial":
        return LocalizedPolynomial(self.num, self.k + 1, self.ring)

    def reduce(self) -> "LocalizedPolynomial":
        """Cancel den from the numerator as long as the division is exact."""
        num, k = self.num, self.k
        if num.is_zero():
            return LocalizedPolynomial(num, 0, self.ring)
        while k > 0:
            q = self.ring.exact_quotient(num)
            if q is None:
                break
            num, k = q, k - 1
        return LocalizedPolynomial(num, k, self.ring)

    def cleared(self, power: int) -> SparsePolynomial | None:
        """(num / den^k) * den^power as an element of B, or None if not in B."""
        if power >= self.k:
            return self.num * self.ring.power(power - self.k)
        num = self.num
        for _ in range(self.k - power):
            num = self.ring.exact_quotient(num)
            if num is None:
                return None
        return num

    def specialize(self, point: Sequence[RationalLike]) -> mpq:
        d = self.ring.den.evaluate(point)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at the specialization point")
        return self.num.evaluate(point) / d**self.k

    def __eq__(self, other) -> bool:
        if not isinstance(other, LocalizedPolynomial):
            return NotImplemented
        k = max(self.k, other.k)
        return self.num * self.ring.power(k - self.k) == other.num * self.ring.power(k - other.k)

    __hash__ = None

    def __repr__(self) -> str:
        return f"({self.num}) / den^{self.k}"


def exact_division(num: SparsePolynomial, den: SparsePolynomial) -> SparsePolynomial | None:
    """Multivariate division in graded-lex order; None unless the remainder is 0."""
    den._check(num)
    if num.is_zero():
        return num
    lead_e, lead_c = den.leading_term()
    rest = den - SparsePolynomial._raw(den.vars, {lead_e: lead_c})
    remaining = dict(num.terms)
    quotient: dict[MultiIndex, mpq] = {}
    while remaining:
        e = max(remaining, key=grlex_key)
        c = remaining[e]
        if not mi_le(lead_e, e):
            return None
        qe, qc = mi_sub(e, lead_e), c / lead_c
        quotient[qe] = qc
        del remaining[e]
        for f, d in rest.terms.items():
            g = mi_add(f, qe)
            s = remaining.get(g, 0) - qc * d
            if s:
                remaining[g] = s
            else:
                remaining.pop(g, None)
    return SparsePolynomial._raw(num.vars, quotient)


# ---------------------------------------------------------------- series


class TruncatedSeries:
    """A power series in ``vars`` known through total degree ``order``.

    Coefficients may be rationals or ``LocalizedPolynomial`` elements; the
    only requirements are ring operations and truthiness for zero.
    """

    __slots__ = ("vars", "order", "terms")

    def __init__(self, variables: Sequence[str], order: int, terms: Mapping | None = None):
        self.vars = tuple(variables)
        self.order = int(order)
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != len(self.vars):
                raise ValueError("exponent arity mismatch")
            if sum(e) > self.order:
                continue
            if isinstance(c, (int, str)) or type(c).__name__ == "Fraction":
                c = Q(c)
            if c:
                clean[e] = c
        self.terms = clean

    @classmethod
    def from_polynomial(cls, P: SparsePolynomial, order: int) -> "TruncatedSeries":
        return cls(P.vars, order, P.terms)

    def _check(self, other: "TruncatedSeries") -> None:
        if other.vars != self.vars:
            raise ValueError("series variable mismatch")
        if other.order != self.order:
            raise ValueError(f"inconsistent truncation orders {self.order} and {other.order}")

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        if isinstance(other, SparsePolynomial):
            if other.vars != self.vars:
                raise ValueError("series variable mismatch")
            return TruncatedSeries.from_polynomial(other, self.order)
        return TruncatedSeries(self.vars, self.order, {(0,) * len(self.vars): other})

    def __add__(self, other) -> "TruncatedSeries":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return TruncatedSeries(self.vars, self.order, out)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(self.vars, self.order, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TruncatedSeries":
        return self._coerce(other) - self

    def __mul__(self, other) -> "TruncatedSeries":
        if not isinstance(other, (TruncatedSeries, SparsePolynomial)):
            return TruncatedSeries(self.vars, self.order, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            s1 = sum(e1)
            for e2, c2 in other.terms.items():
                if s1 + sum(e2) > self.order:
                    continue
                e = mi_add(e1, e2)
                p = c1 * c2
                out[e] = out[e] + p if e in out else p
        return TruncatedSeries(self.vars, self.order, out)

    def __rmul__(self, other) -> "TruncatedSeries":
        return self * other

    def __pow__(self, k: int) -> "TruncatedSeries":
        result = self._coerce(1)
        for _ in range(k):
            result = result * self
        return result

    def homogeneous_part(self, d: int) -> "TruncatedSeries":
        return TruncatedSeries(self.vars, self.order, {e: c for e, c in self.terms.items() if sum(e) == d})

    def valuation(self):
        """Lowest total degree present; +inf for the zero series."""
        return min(map(sum, self.terms), default=float("inf"))

    def coefficient(self, e: Sequence[int]):
        return self.terms.get(tuple(e), 0)

    def map_coefficients(self, f: Callable) -> "TruncatedSeries":
        return TruncatedSeries(self.vars, self.order, {e: f(c) for e, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        if self.vars != other.vars or self.order != other.order:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*X^{list(e)}" for e, c in sorted(self.terms.items(), key=lambda t: grlex_key(t[0])))
        return f"TruncatedSeries(order={self.order}, {body or '0'})"


def homogeneous_decomposition(S: TruncatedSeries) -> list[TruncatedSeries]:
    """Slices V_0, ..., V_order with V_d holding exactly the degree-d terms."""
    return [S.homogeneous_part(d) for d in range(S.order + 1)]


def substitute(P: SparsePolynomial, assignment: Mapping[str, object]):
    """Compose P with the given images of its variables.

    Images may be polynomials (over one common variable list), truncated
    series (sharing one order) or scalars.  With only scalar images the
    exact value is returned.
    """
    missing = [v for v in P.vars if v not in assignment]
    if missing:
        raise ValueError(f"unassigned variables: {missing}")
    images = [assignment[v] for v in P.vars]
    shaped = [x for x in images if isinstance(x, (SparsePolynomial, TruncatedSeries))]
    if not shaped:
        return P.evaluate(images)
    kinds = {type(x) for x in shaped}
    if len(kinds) > 1:
        raise ValueError("cannot mix polynomial and series images")
    proto = shaped[0]
    for x in shaped[1:]:
        if x.vars != proto.vars:
            raise ValueError("images use different variable lists")
        if isinstance(x, TruncatedSeries) and x.order != proto.order:
            raise ValueError(f"inconsistent truncation orders {proto.order} and {x.order}")
    one = proto._coerce(1) if isinstance(proto, TruncatedSeries) else SparsePolynomial.constant(proto.vars, 1)
    lifted = [x if isinstance(x, (SparsePolynomial, TruncatedSeries)) else one * Q(x) for x in images]
    cache: list[dict[int, object]] = [{0: one, 1: x} for x in lifted]

    def power(i: int, k: int):
        c = cache[i]
        if k not in c:
            c[k] = power(i, k - 1) * lifted[i]
        return c[k]

    total = one * 0
    for e, c in P.terms.items():
        term = one * c
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
        total = total + term
    return total


def parse_polynomial(text: str, variables: Sequence[str]) -> SparsePolynomial:
    """Parse a small arithmetic expression such as ``"3*X^2 - 2*X + 1"``.

    Supports + - * ^ (or **), parentheses, integers and p/q literals.
    """
    tokens = _tokenize(text)
    variables = tuple(variables)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        pos += 1
        return tokens[pos - 1]

    def expr():
        node = term()
        while peek() in ("+", "-"):
            op = take()
            rhs = term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term():
        node = factor()
        while peek() in ("*", "/"):
            op = take()
            rhs = factor()
            if op == "*":
                node = node * rhs
            else:
                if rhs.total_degree > 0:
                    raise ValueError("division only by constants")
                node = node.scale(1 / rhs.coefficient((0,) * len(variables)))
        return node

    def factor():
        if peek() == "-":
            take()
            return -factor()
        if peek() == "+":
            take()
            return factor()
        base = atom()
        if peek() in ("^", "**"):
            take()
            exp = take()
            if not exp.isdigit():
                raise ValueError(f"bad exponent {exp!r}")
            base = base ** int(exp)
        return base

    def atom():
        tok = take()
        if tok == "(":
            node = expr()
            if take() != ")":
                raise ValueError("unbalanced parentheses")
            return node
        if tok.isdigit():
            return SparsePolynomial.constant(variables, int(tok))
        if tok in variables:
            return SparsePolynomial.variable(variables, tok)
        raise ValueError(f"unexpected token {tok!r}")

    result = expr()
    if pos != len(tokens):
        raise ValueError(f"trailing input at token {tokens[pos]!r}")
    return result


def _tokenize(text: str) -> list[str]:
    out, i = [], 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif text.startswith("**", i):
            out.append("**")
            i += 2
        elif ch in "+-*/^()":
            out.append(ch)
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(text[i:j])
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(text[i:j])
            i = j
        else:
            raise ValueError(f"unexpected character {ch!r}")
    return out


def random_polynomial(rng, variables: Sequence[str], degree: int, box: int, n_terms: int | None = None,
                      homogeneous: bool = False) -> SparsePolynomial:
    """Random integer polynomial with coefficients in [-box, box].

    ``rng`` needs ``randint(lo, hi)`` (inclusive).  With ``n_terms`` set, that
    many monomials are drawn instead of a dense fill.
    """
    n = len(variables)
    pool = list(indices_of_length(n, degree)) if homogeneous else list(indices_up_to(n, degree))
    if n_terms is not None and n_terms < len(pool):
        chosen = []
        picked = set()
        while len(chosen) < n_terms:
            e = pool[rng.randint(0, len(pool) - 1)]
            if e not in picked:
                picked.add(e)
                chosen.append(e)
        pool = chosen
    return SparsePolynomial(variables, {e: rng.randint(-box, box) for e in pool})


def iter_terms(P: SparsePolynomial) -> Iterable[tuple[MultiIndex, mpq]]:
    return ((e, P.terms[e]) for e in P.sorted_exponents())

"""Exact rationals, the places of Q and their normalized absolute values.

Rationals are ``gmpy2.mpq`` values (always canonical: reduced, positive
denominator, zero is 0/1).  Absolute values are returned as exact rationals at
every place; only logarithms leave the exact world, as ``LogValue``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import gmpy2
import mpmath
from gmpy2 import mpq, mpz

Rational = type(mpq())
RationalLike = Union[int, Fraction, str, "mpq", "mpz"]

DEFAULT_PRECISION_BITS = 128
TRIAL_DIVISION_LIMIT = 10**6

mpmath.mp.prec = max(mpmath.mp.prec, DEFAULT_PRECISION_BITS)


def set_precision(bits: int) -> None:
    """Set the working precision (in bits) used for every logarithm."""
    if bits < 60:
        raise ValueError("working precision must be at least 60 bits")
    mpmath.mp.prec = bits


def get_precision() -> int:
    return mpmath.mp.prec


def Q(x: RationalLike) -> mpq:
    """Coerce ints, Fractions, mpz/mpq and "p/q" strings to a canonical mpq."""
    if isinstance(x, Rational):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, type(mpz()))):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if not s or any(c in s for c in ".eE "):
            raise ValueError(f"not a canonical rational string: {x!r}")
        return mpq(s)
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def format_rational(x: RationalLike) -> str:
    """Canonical wire form: "p/q", or "p" when the denominator is 1."""
    q = Q(x)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------- primes

_SMALL_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


@lru_cache(maxsize=1)
def _sieve() -> tuple[int, ...]:
    limit = math.isqrt(TRIAL_DIVISION_LIMIT) + 1
    flags = bytearray([1]) * (TRIAL_DIVISION_LIMIT + 1)
    flags[0] = flags[1] = 0
    for i in range(2, limit):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return tuple(i for i, f in enumerate(flags) if f)


def _miller_rabin(n: int) -> bool:
    # These bases are a deterministic witness set for n < 3.3e24.
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n: int) -> bool:
    """Trial division up to 10^6, deterministic Miller-Rabin beyond."""
    n = int(n)
    if n < 2:
        return False
    if n <= TRIAL_DIVISION_LIMIT:
        for p in _sieve():
            if p * p > n:
                return True
            if n % p == 0:
                return n == p
        return True
    if any(n % p == 0 for p in _SMALL_BASES):
        return False
    if n < 3_317_044_064_679_887_385_961_981:
        return _miller_rabin(n)
    from sympy import isprime  # BPSW above the deterministic MR range

    return bool(isprime(n))


@lru_cache(maxsize=4096)
def factor_integer(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of |n| as sorted (p, e) pairs; () for 0 and ±1."""
    n = abs(int(n))
    if n < 2:
        return ()
    out: list[tuple[int, int]] = []
    for p in _sieve():
        if p * p > n:
            break
        if n % p == 0:
            n, e = gmpy2.remove(n, p)
            out.append((p, int(e)))
            n = int(n)
    if n > 1:
        if n < TRIAL_DIVISION_LIMIT**2 or is_prime(n):
            out.append((n, 1))
        else:
            from sympy import factorint

            out.extend(sorted((int(p), int(e)) for p, e in factorint(n).items()))
    return tuple(sorted(out))


def valuation(x: RationalLike, p: int) -> int:
    """The p-adic valuation v_p(x) of a nonzero rational."""
    q = Q(x)
    if q == 0:
        raise ValueError("valuation of zero is +infinity")
    num_e = gmpy2.remove(q.numerator, p)[1] if q.numerator % p == 0 else 0
    den_e = gmpy2.remove(q.denominator, p)[1] if q.denominator % p == 0 else 0
    return int(num_e) - int(den_e)


# ---------------------------------------------------------------- places


@dataclass(frozen=True, order=True)
class Place:
    """A place of Q: ``prime=0`` encodes the archimedean place."""

    prime: int = 0

    def __post_init__(self) -> None:
        if self.prime != 0 and not is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")

    @classmethod
    def finite(cls, p: int) -> "Place":
        return cls(int(p))

    @property
    def is_infinite(self) -> bool:
        return self.prime == 0

    def __str__(self) -> str:
        return "inf" if self.is_infinite else f"p:{self.prime}"

    @classmethod
    def parse(cls, text: str) -> "Place":
        text = text.strip()
        if text == "inf":
            return INF
        if text.startswith("p:"):
            return cls.finite(int(text[2:]))
        raise ValueError(f"bad place {text!r}; expected 'inf' or 'p:<prime>'")


INF = Place(0)


def abs_v(x: RationalLike, v: Place) -> mpq:
    """Normalized absolute value |x|_v, exact at every place."""
    q = Q(x)
    if q == 0:
        return mpq(0)
    if v.is_infinite:
        return abs(q)
    k = valuation(q, v.prime)
    return mpq(1, v.prime**k) if k >= 0 else mpq(v.prime ** (-k))


def prime_support(x: RationalLike) -> set[int]:
    q = Q(x)
    if q == 0:
        return set()
    return {p for p, _ in factor_integer(q.numerator)} | {
        p for p, _ in factor_integer(q.denominator)
    }


def relevant_places(xs: Iterable[RationalLike]) -> list[Place]:
    """The infinite place plus every prime dividing a numerator or denominator."""
    xs = list(xs)
    if not xs:
        raise ValueError("relevant_places needs at least one value")
    primes: set[int] = set()
    for x in xs:
        primes |= prime_support(x)
    return [INF] + [Place(p) for p in sorted(primes)]


# ---------------------------------------------------------------- logs


@dataclass(frozen=True)
class LogValue:
    """A real on natural-log scale with an absolute error bound and a method tag."""

    value: mpmath.mpf
    err: mpmath.mpf = field(default_factory=lambda: mpmath.mpf(0))
    method: str = "exact"

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", mpmath.mpf(self.value))
        object.__setattr__(self, "err", mpmath.mpf(self.err))

    def _combine(self, other, sign: int) -> "LogValue":
        if isinstance(other, LogValue):
            method = self.method if self.method == other.method else "mixed"
            return LogValue(self.value + sign * other.value, self.err + other.err, method)
        return LogValue(self.value + sign * mpmath.mpf(other), self.err, self.method)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return LogValue(-self.value, self.err, self.method)

    def __mul__(self, k):
        k = mpmath.mpf(k)
        return LogValue(self.value * k, self.err * abs(k), self.method)

    __rmul__ = __mul__

    def __float__(self) -> float:
        return float(self.value)

    def to_json(self) -> dict:
        return {"value": float(self.value), "err": float(self.err), "method": self.method}


def rounding_slack(x) -> mpmath.mpf:
    """A generous bound on accumulated rounding error for a value of size |x|."""
    eps = mpmath.ldexp(1, 16 - mpmath.mp.prec)
    return eps * (1 + abs(mpmath.mpf(x)))


def log_rational(x: RationalLike) -> mpmath.mpf:
    """Natural log of a positive rational at working precision."""
    q = Q(x)
    if q <= 0:
        raise ValueError("log of a non-positive rational")
    return mpmath.log(mpmath.mpf(int(q.numerator))) - mpmath.log(mpmath.mpf(int(q.denominator)))


def log_abs_v(x: RationalLike, v: Place) -> mpmath.mpf:
    a = abs_v(x, v)
    if a == 0:
        raise ValueError("log|0|_v is -infinity")
    return log_rational(a)


def product_formula_check(x: RationalLike) -> LogValue:
    """Sum of log|x|_v over the relevant places, computed exactly.

    Each place contributes an integer multiple of log p; the multiples are
    added as integers per prime, so the result is exactly zero.
    """
    q = Q(x)
    if q == 0:
        raise ValueError("product formula needs a nonzero rational")
    exponents: dict[int, int] = {}
    for p, e in factor_integer(q.numerator):
        exponents[p] = exponents.get(p, 0) + e
    for p, e in factor_integer(q.denominator):
        exponents[p] = exponents.get(p, 0) - e
    for v in relevant_places([q])[1:]:
        exponents[v.prime] -= valuation(q, v.prime)
    total = mpmath.mpf(0)
    for p, e in exponents.items():
        total += e * mpmath.log(p)
    return LogValue(total)


def to_jsonable(x):
    """Render exact rationals as strings and mpf as floats for JSON output."""
    if isinstance(x, Rational):
        return format_rational(x)
    if isinstance(x, type(mpz())):
        return int(x)
    if isinstance(x, mpmath.mpf):
        return float(x)
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, LogValue):
        return x.to_json()
    if isinstance(x, Place):
        return str(x)
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return x.to_json()
    return x

"""Tri-state verdicts and certification records for inequality checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Iterable

import mpmath

from .exact import LogValue, to_jsonable


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    INCONCLUSIVE = "inconclusive"
    FAILED = "FAILED"

    def __str__(self) -> str:
        return self.value


_RANK = {Verdict.HOLDS: 0, Verdict.INCONCLUSIVE: 1, Verdict.FAILED: 2}


def worst(verdicts: Iterable[Verdict]) -> Verdict:
    out = Verdict.HOLDS
    for v in verdicts:
        if _RANK[v] > _RANK[out]:
            out = v
    return out


def compare_le(lhs, rhs, err=0) -> tuple[Verdict, Any]:
    """Verdict for ``lhs <= rhs`` given an absolute error bar on the difference.

    With err == 0 the comparison is exact and the answer is holds or FAILED.
    Otherwise a violation that fits inside the error bar is inconclusive.
    """
    if isinstance(lhs, LogValue):
        err = err + lhs.err
        lhs = lhs.value
    if isinstance(rhs, LogValue):
        err = err + rhs.err
        rhs = rhs.value
    margin = rhs - lhs
    if err == 0:
        return (Verdict.HOLDS if margin >= 0 else Verdict.FAILED), margin
    if margin >= err:
        return Verdict.HOLDS, margin
    if margin <= -err:
        return Verdict.FAILED, margin
    return Verdict.INCONCLUSIVE, margin


@dataclass
class Check:
    """One inequality ``lhs <= rhs`` with its verdict."""

    label: str
    lhs: Any
    rhs: Any
    margin: Any
    err: Any
    verdict: Verdict
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "lhs": to_jsonable(self.lhs),
            "rhs": to_jsonable(self.rhs),
            "margin": to_jsonable(self.margin),
            "err": to_jsonable(self.err),
            "verdict": self.verdict.value,
            **({"detail": to_jsonable(self.detail)} if self.detail else {}),
        }


def check_le(label: str, lhs, rhs, err=0, **detail) -> Check:
    verdict, margin = compare_le(lhs, rhs, err)
    if isinstance(lhs, LogValue):
        err = err + lhs.err
    if isinstance(rhs, LogValue):
        err = err + rhs.err
    return Check(label, lhs, rhs, margin, err, verdict, detail)


def check_true(label: str, ok: bool, **detail) -> Check:
    """A boolean assertion recorded in the same shape as an inequality."""
    return Check(label, None, None, None, 0, Verdict.HOLDS if ok else Verdict.FAILED, detail)


@dataclass
class Certification:
    """A named batch of checks; the verdict is the worst one."""

    name: str
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    @property
    def verdict(self) -> Verdict:
        return worst(c.verdict for c in self.checks)

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.verdict is Verdict.FAILED]

    def counts(self) -> dict[str, int]:
        out = {v.value: 0 for v in Verdict}
        for c in self.checks:
            out[c.verdict.value] += 1
        return out

    def min_margin(self):
        margins = [c.margin for c in self.checks if c.margin is not None]
        return min(margins) if margins else None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict.value,
            "counts": self.counts(),
            "info": to_jsonable(self.info),
            "checks": [c.to_json() for c in self.checks],
        }


def numeric_slack(*values) -> mpmath.mpf:
    """Rounding allowance for a comparison between working-precision reals."""
    eps = mpmath.ldexp(1, 16 - mpmath.mp.prec)
    return eps * (1 + sum(abs(mpmath.mpf(v.value if isinstance(v, LogValue) else v)) for v in values))


__all__ = [
    "Verdict",
    "Check",
    "Certification",
    "check_le",
    "check_true",
    "compare_le",
    "worst",
    "numeric_slack",
]

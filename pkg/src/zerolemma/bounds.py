"""Right-hand sides of the explicit degree and height bounds.

Every evaluator is plain arithmetic over named scalars passed as a mapping.
Degree bounds and the ratio condition are exact rationals; height bounds are
working-precision reals.  Nothing is clamped: out-of-domain inputs still
evaluate, and ``domain_warnings`` lists what looks wrong.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping

import mpmath
from gmpy2 import mpq

from .exact import LogValue, Q, to_jsonable
from .certify import numeric_slack
from .implicit import lemma_5_9_bound


class MissingScalar(KeyError):
    """A bound needs a scalar that was not supplied."""

    def __init__(self, name: str, bound: str):
        super().__init__(name)
        self.name, self.bound = name, bound

    def __str__(self) -> str:
        return f"{self.bound}: missing scalar {self.name!r}"


def _rat(x) -> mpq:
    if isinstance(x, float):
        return mpq(Fraction(x).numerator, Fraction(x).denominator)
    return Q(x)


def _real(x) -> mpmath.mpf:
    if isinstance(x, mpmath.mpf):
        return x
    if isinstance(x, (int, float)):
        return mpmath.mpf(x)
    q = _rat(x)
    return mpmath.mpf(int(q.numerator)) / int(q.denominator)


class _Scalars:
    """Typed access to a mapping of named scalars, raising MissingScalar."""

    def __init__(self, values: Mapping, bound: str):
        self.values, self.bound = values, bound

    def _get(self, name):
        if name not in self.values or self.values[name] is None:
            raise MissingScalar(name, self.bound)
        return self.values[name]

    def int(self, name) -> int:
        return int(self._get(name))

    def rat(self, name) -> mpq:
        return _rat(self._get(name))

    def real(self, name) -> mpmath.mpf:
        return _real(self._get(name))

    def list(self, name, kind: Callable = _real, length: int | None = None) -> list:
        raw = self._get(name)
        if not isinstance(raw, (list, tuple)):
            raw = [raw]
        out = [kind(x) for x in raw]
        if length is not None and len(out) != length:
            raise ValueError(f"{self.bound}: {name!r} needs {length} entries, got {len(out)}")
        return out


# ---------------------------------------------------------------- coefficient families and Delta heights


def prop_4_8_height_rhs(values: Mapping) -> mpmath.mpf:
    """sum log(E_l) m_l + k sum delta_l (h(e_l) + g_l log s)."""
    s = _Scalars(values, "prop 4.8")
    m = s.list("m")
    p = len(m)
    E = s.list("E", length=p)
    k = s.int("k")
    return mpmath.fsum(mpmath.log(e) * mm for e, mm in zip(E, m)) + k * _block_term(s, p)


def cor_4_15_height_rhs(values: Mapping) -> mpmath.mpf:
    """sum (log E_l + log 2) m_l + k (g log 2 + sum delta_l (h(e_l) + g_l log s))."""
    s = _Scalars(values, "cor 4.15")
    m = s.list("m")
    p = len(m)
    E = s.list("E", length=p)
    k, g = s.int("k"), s.int("g")
    log2 = mpmath.log(2)
    return (mpmath.fsum((mpmath.log(e) + log2) * mm for e, mm in zip(E, m))
            + k * (g * log2 + _block_term(s, p)))


def _block_term(s: _Scalars, p: int) -> mpmath.mpf:
    """sum_l delta_l (h(e_l) + g_l log s)."""
    deltas = s.list("delta_blocks", length=p)
    h_e = s.list("h_e_blocks", length=p)
    gs = s.list("g_blocks", length=p)
    log_s = mpmath.log(s.real("s"))
    return mpmath.fsum(d * (h + gl * log_s) for d, h, gl in zip(deltas, h_e, gs))


def prop_4_16_rhs(values: Mapping) -> mpmath.mpf:
    """Height bound for the family Delta^I P, t_l(I) <= m_l, of a form P of degree delta."""
    s = _Scalars(values, "prop 4.16")
    m = s.list("m")
    p = len(m)
    E = s.list("E", length=p)
    c, cp = s.real("c"), s.real("c_prime")
    delta, g, N = s.real("delta"), s.int("g"), s.int("N")
    log2 = mpmath.log(2)
    return (mpmath.fsum((mpmath.log(e) + log2) * mm for e, mm in zip(E, m))
            + c * delta * (g * log2 + _block_term(s, p))
            + s.real("h_P") + delta * s.real("h_A")
            + delta * (2 * c + cp + 1) * mpmath.log(N + 1))


def lemma_4_10_degree_rhs(values: Mapping) -> mpq:
    """deg(G) delta^d."""
    s = _Scalars(values, "lemma 4.10")
    return s.rat("deg_G") * s.rat("delta") ** s.int("d")


def lemma_4_10_height_rhs(values: Mapping) -> mpmath.mpf:
    """h(G) delta^d + g (eta + 3 log(deg(G) delta^g + 1)) deg(G) delta^(d-1)."""
    s = _Scalars(values, "lemma 4.10")
    degG, delta, d, g = s.real("deg_G"), s.real("delta"), s.int("d"), s.int("g")
    return (s.real("h_G") * delta**d
            + g * (s.real("eta") + 3 * mpmath.log(degG * delta**g + 1)) * degG * delta ** (d - 1))


def thm_4_13_degree_rhs(values: Mapping) -> mpq:
    """deg(G) (c' delta)^(g-d)."""
    s = _Scalars(values, "thm 4.13")
    return s.rat("deg_G") * (s.rat("c_prime") * s.rat("delta")) ** (s.int("g") - s.int("d"))


def thm_4_13_height_rhs(values: Mapping) -> mpmath.mpf:
    """Height bound for the obstruction subvariety; ``t`` holds t_l(W_0 + ... + W_(r-1))."""
    s = _Scalars(values, "thm 4.13")
    t = s.list("t")
    p = len(t)
    E = s.list("E", length=p)
    c, cp, delta = s.real("c"), s.real("c_prime"), s.real("delta")
    g, d, N, degG = s.int("g"), s.int("d"), s.int("N"), s.real("deg_G")
    log2 = mpmath.log(2)
    bracket = (mpmath.fsum((mpmath.log(e) + log2) * tt for e, tt in zip(E, t))
               + c * delta * (_block_term(s, p) + g * log2)
               + s.real("h_P") + delta * s.real("h_A")
               + delta * (2 * c + 2 * cp + 1) * (mpmath.log(N) + 1)
               + 3 * mpmath.log(degG * (cp * delta) ** g + 1))
    return s.real("h_G") * (cp * delta) ** (g - d) + g * bracket * degG * (cp * delta) ** (g - d - 1)


# ---------------------------------------------------------------- product varieties


def f_N_G_e(values: Mapping) -> mpmath.mpf:
    s = _Scalars(values, "f(N,G,e)")
    return lemma_5_9_bound(s.int("N"), s.int("g"), s.real("deg_G"), s.real("h_G"), s.real("h_e"))


def thm_5_17_height_rhs(values: Mapping) -> mpmath.mpf:
    """The generic height bound with log E replaced by f(N, G, e); d°A is taken as c + c'."""
    s = _Scalars(values, "thm 5.17")
    c, cp, delta = s.real("c"), s.real("c_prime"), s.real("delta")
    g, d, N, degG = s.int("g"), s.int("d"), s.int("N"), s.real("deg_G")
    degA = s.real("deg_A") if values.get("deg_A") is not None else c + cp
    f = lemma_5_9_bound(N, g, degG, s.real("h_G"), s.real("h_e"))
    bracket = (f * s.real("H_W")
               + c * delta * (s.real("h_e") + g * mpmath.log(2))
               + s.real("h_P") + delta * s.real("h_A")
               + delta * (2 * degA + 1) * (mpmath.log(N) + 1)
               + 3 * mpmath.log(degG * (cp * delta) ** g + 1))
    return s.real("h_G") * (cp * delta) ** (g - d) + g * bracket * degG * (cp * delta) ** (g - d - 1)


def thm_5_19_R(values: Mapping, l: int) -> mpmath.mpf:
    """R_l for block l (0-based) of a product group."""
    s = _Scalars(values, "thm 5.19")
    n = s.list("n_blocks")
    p = len(n)
    gl = s.list("g_blocks", length=p)[l]
    hG = s.list("h_G_blocks", length=p)[l]
    dG = s.list("d_G", length=p)[l]
    he = s.list("h_e_blocks", length=p)[l]
    hA = s.list("h_A_blocks", length=p)[l]
    nl = n[l]
    c, cp, eps, g = s.real("c"), s.real("c_prime"), s.real("eps"), s.real("g")
    brace = (4 * (nl - gl) * hG + (2 * (nl - gl + 1) * he + 4 * (nl - gl)) * dG
             + (nl - gl + 1) * (2 * gl + 5) * (mpmath.log(dG) + 1) - 2 * (nl - gl + 1) * he)
    return (hG / ((gl + 1) * dG) + (g - 1) * eps * brace
            + c * (he + gl * mpmath.log(2)) + hA + (3 * c + 3 * cp + 4) * mpmath.log(nl + 1))


def thm_5_19_S(values: Mapping) -> mpmath.mpf:
    s = _Scalars(values, "thm 5.19")
    dG = s.list("d_G")
    p = len(dG)
    c, cp, g = s.real("c"), s.real("c_prime"), s.real("g")
    return (3 * mpmath.fsum(mpmath.log(x) for x in dG)
            + g * (3 * mpmath.log(p) + 3 * mpmath.log(cp) + c * mpmath.log(2)) + 2 * c + 2 * cp + 4)


def thm_5_19_degree_rhs(values: Mapping) -> mpq:
    """(g c' / eps)^(g - dim V) d(G_1)...d(G_p)."""
    s = _Scalars(values, "thm 5.19")
    out = (s.rat("g") * s.rat("c_prime") / s.rat("eps")) ** (s.int("g") - s.int("dim_V"))
    for x in s.list("d_G", kind=_rat):
        out *= x
    return out


def thm_5_19_height_rhs(values: Mapping) -> mpmath.mpf:
    """((g+1) c' / eps)^(g - dim V) [h~(P) + sum R_l delta_l + S]."""
    s = _Scalars(values, "thm 5.19")
    deltas = s.list("delta_blocks")
    g, cp, eps = s.int("g"), s.real("c_prime"), s.real("eps")
    inner = (s.real("h_P") + mpmath.fsum(thm_5_19_R(values, l) * d for l, d in enumerate(deltas))
             + thm_5_19_S(values))
    return ((g + 1) * cp / eps) ** (g - s.int("dim_V")) * inner


def condition_1_33(values: Mapping) -> list[bool]:
    """delta_l / delta_(l+1) > (p c' / eps)^g d(G_1)...d(G_p), per adjacent pair (exact)."""
    s = _Scalars(values, "condition 1.33")
    deltas = s.list("delta_blocks", kind=_rat)
    p = len(deltas)
    threshold = (p * s.rat("c_prime") / s.rat("eps")) ** s.int("g")
    for x in s.list("d_G", kind=_rat, length=p):
        threshold *= x
    return [deltas[l] / deltas[l + 1] > threshold for l in range(p - 1)]


def corollary_degree_rhs(values: Mapping) -> mpq:
    """(n / eps)^(n - dim V) for powers of the multiplicative group."""
    s = _Scalars(values, "corollary")
    n = s.int("n")
    return (mpq(n) / s.rat("eps")) ** (n - s.int("dim_V"))


def corollary_height_rhs(values: Mapping) -> mpmath.mpf:
    """((n+1)/eps)^(n - dim V) {h(P) + (n eps + 2) sum (2 n_i + 5) delta_i + 3 (n+1)(log p + 2)}."""
    s = _Scalars(values, "corollary")
    n_blocks = s.list("n_blocks")
    p = len(n_blocks)
    deltas = s.list("delta_blocks", length=p)
    n = s.int("n")
    eps = s.real("eps")
    inner = (s.real("h_P") + (n * eps + 2) * mpmath.fsum((2 * ni + 5) * d for ni, d in zip(n_blocks, deltas))
             + 3 * (n + 1) * (mpmath.log(p) + 2))
    return ((n + 1) / eps) ** (n - s.int("dim_V")) * inner


def corollary_hypotheses(values: Mapping) -> list[bool]:
    """delta_i >= n_i + 1 per block, then delta_i / delta_(i+1) > (p / eps)^n per pair."""
    s = _Scalars(values, "corollary")
    n_blocks = s.list("n_blocks", kind=int)
    deltas = s.list("delta_blocks", kind=_rat, length=len(n_blocks))
    p = len(deltas)
    threshold = (mpq(p) / s.rat("eps")) ** s.int("n")
    return [d >= ni + 1 for d, ni in zip(deltas, n_blocks)] + [
        deltas[i] / deltas[i + 1] > threshold for i in range(p - 1)]


# ---------------------------------------------------------------- dispatch


def _lv(x) -> LogValue:
    v = _real(x) if not isinstance(x, mpmath.mpf) else x
    return LogValue(v, numeric_slack(v), "formula")


def evaluate_bounds(theorem: str, values: Mapping) -> dict:
    """All right-hand sides of one statement, as a JSON-ready record."""
    theorem = theorem.lower()
    out: dict = {}
    if theorem in ("4.8", "prop-4.8"):
        out["height"] = _lv(prop_4_8_height_rhs(values))
    elif theorem in ("4.15", "cor-4.15"):
        out["height"] = _lv(cor_4_15_height_rhs(values))
    elif theorem in ("4.16", "prop-4.16"):
        out["height"] = _lv(prop_4_16_rhs(values))
    elif theorem in ("4.10", "lemma-4.10"):
        out["degree"] = lemma_4_10_degree_rhs(values)
        out["height"] = _lv(lemma_4_10_height_rhs(values))
    elif theorem in ("4.13", "thm-4.13"):
        out["degree"] = thm_4_13_degree_rhs(values)
        out["height"] = _lv(thm_4_13_height_rhs(values))
    elif theorem in ("5.9", "f"):
        out["f"] = _lv(f_N_G_e(values))
    elif theorem in ("5.17", "thm-5.17"):
        out["degree"] = thm_4_13_degree_rhs(values)
        out["height"] = _lv(thm_5_17_height_rhs(values))
    elif theorem in ("5.19", "thm-5.19"):
        p = len(_Scalars(values, "thm 5.19").list("delta_blocks"))
        out["degree"] = thm_5_19_degree_rhs(values)
        out["height"] = _lv(thm_5_19_height_rhs(values))
        out["R"] = [_lv(thm_5_19_R(values, l)) for l in range(p)]
        out["S"] = _lv(thm_5_19_S(values))
        out["condition_1_33"] = condition_1_33(values)
    elif theorem == "corollary":
        out["degree"] = corollary_degree_rhs(values)
        out["height"] = _lv(corollary_height_rhs(values))
        out["hypotheses"] = corollary_hypotheses(values)
    else:
        raise ValueError(f"unknown statement {theorem!r}")
    out["warnings"] = domain_warnings(values)
    return out


def domain_warnings(values: Mapping) -> list[str]:
    """Inputs outside the range where the statements apply."""
    warn = []
    eps = values.get("eps")
    if eps is not None and not (0 < _rat(eps) <= 1):
        warn.append("eps outside (0, 1]")
    for name in ("h_P", "h_A", "h_G", "h_e", "eta"):
        if values.get(name) is not None and _real(values[name]) < 0:
            warn.append(f"{name} is negative")
    for name in ("c", "c_prime", "g", "N", "deg_G"):
        if values.get(name) is not None and _real(values[name]) < 1:
            warn.append(f"{name} < 1")
    deltas, gs = values.get("delta_blocks"), values.get("g_blocks")
    if deltas is not None and gs is not None:
        for l, (d, gl) in enumerate(zip(deltas, gs)):
            if _rat(d) < int(gl) + 1:
                warn.append(f"delta_{l + 1} < g_{l + 1} + 1")
    if values.get("d") is not None and values.get("g") is not None and int(values["d"]) > int(values["g"]):
        warn.append("d > g")
    return warn


def bounds_to_json(record: dict) -> dict:
    return to_jsonable({k: (v.to_json() if isinstance(v, LogValue) else v) for k, v in record.items()})

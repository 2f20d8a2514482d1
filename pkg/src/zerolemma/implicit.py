"""Taylor coefficients of an implicit function T = T(Y) defined by P(Y, T) = 0.

Two independent constructions are provided:

* ``solve_series`` builds U(X) with P(Y + X, T + U(X)) = P(Y, T) slice by
  slice, each new slice being -B/P'_T where B is the next homogeneous slice of
  the Taylor shift of P.  The same iteration runs over S^-1 B (symbolic, with
  explicit powers of P'_T) or over Q after specializing at the base point.
* ``cofactor_recursion`` differentiates a_I = P_I / P'_T^(2m-1) one variable
  at a time, producing the cofactor polynomials P_I.

Variables of P are ordered (Y_1, ..., Y_n, T): T is always last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence

import mpmath
from gmpy2 import mpq

from .certify import Certification, check_le, check_true, numeric_slack
from .exact import INF, LogValue, Place, Q, RationalLike, abs_v, log_rational, relevant_places
from .poly import (
    Localization,
    LocalizedPolynomial,
    MultiIndex,
    SparsePolynomial,
    TruncatedSeries,
    divided_derivative,
    indices_of_length,
    indices_up_to,
    length_v,
    mi_add,
    mi_sub,
    substitute,
    unit,
)


@dataclass(frozen=True)
class ImplicitProblem:
    """P(Y_1..Y_n, T) with a simple point x = (y, t) on P = 0."""

    P: SparsePolynomial
    base_point: tuple
    d: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "base_point", tuple(Q(c) for c in self.base_point))
        if self.P.nvars < 2:
            raise ValueError("need at least one Y variable and T")
        if len(self.base_point) != self.P.nvars:
            raise ValueError("base point dimension does not match the variables")
        deg = self.P.total_degree
        if self.d is None:
            object.__setattr__(self, "d", max(int(deg), 1) if deg != float("-inf") else 1)
        if deg > self.d:
            raise ValueError(f"total degree {deg} exceeds the declared bound {self.d}")
        if self.P.evaluate(self.base_point) != 0:
            raise ValueError("P does not vanish at the base point")
        if self.PT.evaluate(self.base_point) == 0:
            raise ValueError("dP/dT vanishes at the base point")

    @property
    def n(self) -> int:
        return self.P.nvars - 1

    @property
    def PT(self) -> SparsePolynomial:
        return self.P.diff(self.n)

    @property
    def t(self) -> mpq:
        return self.base_point[-1]

    @property
    def y(self) -> tuple:
        return self.base_point[:-1]

    def series_vars(self) -> tuple[str, ...]:
        return tuple(f"X{k + 1}" for k in range(self.n))

    def to_json(self) -> dict:
        from .exact import format_rational

        return {
            "P": self.P.to_json(),
            "base_point": [format_rational(c) for c in self.base_point],
            "d": self.d,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ImplicitProblem":
        return cls(SparsePolynomial.from_json(data["P"]), tuple(Q(str(c)) for c in data["base_point"]), data.get("d"))


@dataclass
class SeriesSolution:
    problem: ImplicitProblem
    order: int
    U: TruncatedSeries | None
    taylor: dict[MultiIndex, mpq]

    def slices(self) -> list[TruncatedSeries]:
        if self.U is None:
            raise ValueError("symbolic series not computed")
        return [self.U.homogeneous_part(m) for m in range(self.order + 1)]


# ---------------------------------------------------------------- series solver


def taylor_shift_table(P: SparsePolynomial) -> dict[MultiIndex, SparsePolynomial]:
    """All nonzero divided derivatives D^L P with L != 0."""
    deg = int(P.total_degree) if P else 0
    table = {}
    for L in indices_up_to(P.nvars, deg):
        if any(L):
            D = divided_derivative(P, L)
            if D:
                table[L] = D
    return table


def _iterate_series(n: int, order: int, shift: Mapping[MultiIndex, object], one, div: Callable):
    """Slices V_1..V_order of U over a generic coefficient ring.

    ``shift`` maps L = (theta, m) to the ring element D^L P; ``div`` computes
    -c / P'_T.  Returns a list of dicts exponent -> coefficient.
    """
    slices: list[dict] = [{}]  # V_0 = 0
    # pw[(m, j)] = degree-j slice of U^m, filled lazily once V_1..V_{j-m+1} exist.
    pw: dict[tuple[int, int], dict] = {}

    def power_slice(m: int, j: int) -> dict:
        if m == 0:
            return {(0,) * n: one} if j == 0 else {}
        if j < m:
            return {}
        if m == 1:
            return slices[j]
        key = (m, j)
        if key not in pw:
            acc: dict = {}
            for a in range(1, j - m + 2):
                left = slices[a]
                right = power_slice(m - 1, j - a)
                for e1, c1 in left.items():
                    for e2, c2 in right.items():
                        e = mi_add(e1, e2)
                        p = c1 * c2
                        acc[e] = acc[e] + p if e in acc else p
            pw[key] = {e: c for e, c in acc.items() if c}
        return pw[key]

    for step in range(1, order + 1):
        B: dict = {}
        for L, coef in shift.items():
            theta, m = L[:n], L[n]
            j = step - sum(theta)
            if j < 0 or (m == 1 and j == step):
                continue  # the (0, 1) term would need V_step itself
            if m == 0 and j != 0:
                continue
            for e, c in power_slice(m, j).items():
                target = mi_add(e, theta)
                p = coef * c
                B[target] = B[target] + p if target in B else p
        slices.append({e: div(c) for e, c in B.items() if c})
    return slices


def solve_series(problem: ImplicitProblem, order: int, symbolic: bool = True) -> SeriesSolution:
    """Series solution through total degree ``order``.

    With ``symbolic`` the coefficients live in S^-1 B as LocalizedPolynomial
    values and the rational table is their specialization; otherwise only
    the rational table is computed (same iteration, coefficients in Q).
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    n = problem.n
    xvars = problem.series_vars()
    table = taylor_shift_table(problem.P)
    if symbolic:
        ring = Localization(problem.PT)
        shift = {L: ring.element(D) for L, D in table.items()}
        one = ring.element(SparsePolynomial.constant(problem.P.vars, 1))
        slices = _iterate_series(n, order, shift, one, lambda c: (-c).divide_by_den())
        terms = {e: c for s in slices for e, c in s.items()}
        U = TruncatedSeries(xvars, order, terms)
        taylor = {e: c.specialize(problem.base_point) for e, c in terms.items()}
    else:
        U = None
        taylor = _rational_slices(problem, order, table)
    full = {I: taylor.get(I, mpq(0)) for I in indices_up_to(n, order)}
    full[(0,) * n] = problem.t
    return SeriesSolution(problem, order, U, full)


def _rational_slices(problem: ImplicitProblem, order: int, table=None) -> dict[MultiIndex, mpq]:
    table = table if table is not None else taylor_shift_table(problem.P)
    x = problem.base_point
    shift = {L: D.evaluate(x) for L, D in table.items()}
    shift = {L: c for L, c in shift.items() if c}
    pt = problem.PT.evaluate(x)
    slices = _iterate_series(problem.n, order, shift, mpq(1), lambda c: -c / pt)
    return {e: c for s in slices for e, c in s.items()}


def taylor_coefficients(problem: ImplicitProblem, order: int) -> dict[MultiIndex, mpq]:
    """a_I for all |I| <= order (a_0 = t), by the specialized series iteration."""
    return solve_series(problem, order, symbolic=False).taylor


def shift_residual(problem: ImplicitProblem, taylor: Mapping[MultiIndex, mpq], order: int) -> TruncatedSeries:
    """P(y + X, f(X)) through degree ``order``, by direct substitution.

    Zero exactly when ``taylor`` holds the Taylor coefficients of the branch.
    """
    n = problem.n
    xvars = problem.series_vars()
    images = {}
    for k, name in enumerate(problem.P.vars[:-1]):
        images[name] = TruncatedSeries(xvars, order, {(0,) * n: problem.y[k], unit(n, k): 1})
    images[problem.P.vars[-1]] = TruncatedSeries(xvars, order, dict(taylor))
    return substitute(problem.P, images)


def symbolic_identity_residual(sol: SeriesSolution) -> TruncatedSeries:
    """P(Y + X, T + U(X)) - P(Y, T) over S^-1 B, by direct substitution."""
    if sol.U is None:
        raise ValueError("symbolic series not computed")
    problem = sol.problem
    ring = next(iter(sol.U.terms.values())).ring if sol.U.terms else Localization(problem.PT)
    n = problem.n
    xvars = problem.series_vars()
    gens = SparsePolynomial.generators(problem.P.vars)
    zero_e = (0,) * n
    images = {}
    for k, name in enumerate(problem.P.vars[:-1]):
        images[name] = TruncatedSeries(xvars, sol.order, {zero_e: ring.element(gens[k]), unit(n, k): ring.element(gens[0] ** 0)})
    t_terms = dict(sol.U.terms)
    t_terms[zero_e] = ring.element(gens[-1]) + t_terms.get(zero_e, ring.element(gens[-1] * 0))
    images[problem.P.vars[-1]] = TruncatedSeries(xvars, sol.order, t_terms)
    lifted = substitute(problem.P, images)
    return lifted - ring.element(problem.P)


def newton_taylor_numeric(problem: ImplicitProblem, order: int) -> dict[MultiIndex, mpmath.mpf]:
    """Floating-point Newton iteration T <- T - P/P_T on truncated series.

    Only a smoke test for the exact paths.
    """
    n = problem.n
    xvars = problem.series_vars()
    conv = lambda c: mpmath.mpf(int(c.numerator)) / int(c.denominator)
    images = {}
    for k, name in enumerate(problem.P.vars[:-1]):
        images[name] = TruncatedSeries(xvars, order, {(0,) * n: conv(problem.y[k]), unit(n, k): mpmath.mpf(1)})
    T = TruncatedSeries(xvars, order, {(0,) * n: conv(problem.t)})
    PT = problem.PT
    for _ in range(order.bit_length() + 2):
        images[problem.P.vars[-1]] = T
        f = _substitute_numeric(problem.P, images, conv)
        fp = _substitute_numeric(PT, images, conv)
        T = T - f * _series_inverse(fp)
    return {e: T.terms.get(e, mpmath.mpf(0)) for e in indices_up_to(n, order)}


def _substitute_numeric(P: SparsePolynomial, images, conv) -> TruncatedSeries:
    proto = next(iter(images.values()))
    total = TruncatedSeries(proto.vars, proto.order, {})
    for e, c in P.terms.items():
        term = TruncatedSeries(proto.vars, proto.order, {(0,) * len(proto.vars): conv(c)})
        for name, k in zip(P.vars, e):
            for _ in range(k):
                term = term * images[name]
        total = total + term
    return total


def _series_inverse(S: TruncatedSeries) -> TruncatedSeries:
    zero = (0,) * len(S.vars)
    s0 = S.terms.get(zero)
    if not s0:
        raise ZeroDivisionError("series with zero constant term is not invertible")
    R = TruncatedSeries(S.vars, S.order, {e: -c / s0 for e, c in S.terms.items() if e != zero})
    acc = TruncatedSeries(S.vars, S.order, {zero: mpmath.mpf(1)})
    term = acc
    for _ in range(S.order):
        term = term * R
        acc = acc + term
    return acc * (1 / s0)


# ---------------------------------------------------------------- cofactor recursion


@dataclass(frozen=True)
class CofactorPolynomial:
    I: MultiIndex
    P_I: SparsePolynomial

    @property
    def m(self) -> int:
        return sum(self.I)


def _parent(I: MultiIndex) -> tuple[MultiIndex, int]:
    """The index I' - e_k with k the first position of a maximal entry."""
    k = max(range(len(I)), key=lambda i: (I[i], -i))
    return mi_sub(I, unit(len(I), k)), k


class CofactorTable:
    """Memoized P_I for one problem, built by the one-variable recursion."""

    def __init__(self, problem: ImplicitProblem):
        self.problem = problem
        n = problem.n
        P = problem.P
        self.PT = P.diff(n)
        self.PTT = self.PT.diff(n)
        self.PT2 = self.PT * self.PT
        self.PY = [P.diff(k) for k in range(n)]
        self.PT_PY = [self.PT * q for q in self.PY]
        self.curv = [self.PT * self.PY[k].diff(n) - self.PY[k] * self.PTT for k in range(n)]
        self._memo: dict[MultiIndex, SparsePolynomial] = {}

    def get(self, I: Sequence[int]) -> SparsePolynomial:
        I = tuple(I)
        if len(I) != self.problem.n:
            raise ValueError("multi-index arity does not match the Y variables")
        m = sum(I)
        if m == 0:
            raise ValueError("P_I is defined for |I| >= 1; a_0 = t")
        if I in self._memo:
            return self._memo[I]
        parent, k = _parent(I)
        if m == 1:
            out = -self.PY[k]
        else:
            PI = self.get(parent)
            mm = m - 1
            n = self.problem.n
            body = PI.diff(k) * self.PT2 - PI.diff(n) * self.PT_PY[k] - PI * self.curv[k] * (2 * mm - 1)
            out = body.scale(mpq(1, I[k]))
        self._memo[I] = out
        return out

    def coefficient(self, I: Sequence[int]) -> mpq:
        I = tuple(I)
        if not any(I):
            return self.problem.t
        m = sum(I)
        x = self.problem.base_point
        return self.get(I).evaluate(x) / self.PT.evaluate(x) ** (2 * m - 1)


def cofactor_recursion(problem: ImplicitProblem, I: Sequence[int], table: CofactorTable | None = None) -> CofactorPolynomial:
    table = table or CofactorTable(problem)
    I = tuple(I)
    P_I = table.get(I)
    m = sum(I)
    if P_I.total_degree > (2 * m - 1) * (problem.d - 1):
        raise ArithmeticError(f"degree bound violated for I={I}")
    return CofactorPolynomial(I, P_I)


def recursion_taylor(problem: ImplicitProblem, order: int) -> dict[MultiIndex, mpq]:
    table = CofactorTable(problem)
    return {I: table.coefficient(I) for I in indices_up_to(problem.n, order)}


def verify_lemma_2_1(problem: ImplicitProblem, m_max: int, table: CofactorTable | None = None) -> Certification:
    """Degree and infinite-place length bounds for every P_I with 1 <= |I| <= m_max."""
    table = table or CofactorTable(problem)
    n, d = problem.n, problem.d
    LP = length_v(problem.P, INF)
    cert = Certification("cofactor-bounds")
    for m in range(1, m_max + 1):
        for I in indices_of_length(n, m):
            PI = table.get(I)
            deg = PI.total_degree
            cert.add(check_le(f"deg P_{list(I)}", deg if PI else -1, (2 * m - 1) * (d - 1), I=list(I)))
            bound = (8 * n) ** (m - 1) * d ** (3 * m - 2) * LP ** (2 * m - 1)
            cert.add(check_le(f"L_inf P_{list(I)}", length_v(PI, INF), mpq(bound), I=list(I)))
    return cert


# ---------------------------------------------------------------- denominators


def verify_denominator_bounds(sol: SeriesSolution, partial_sums: int | None = None) -> Certification:
    """Slice V_m clears at power 2m-1; slices of the shift of U_n clear at 2d-2.

    Each coefficient num / P'_T^k is tested by actually clearing it against
    the claimed power (exact division when k exceeds it).  The second family
    is costly; ``partial_sums`` caps the truncation orders n it is run for.
    """
    if sol.U is None:
        raise ValueError("symbolic series not computed")
    cert = Certification("denominator-bounds")
    slices = sol.slices()
    for m in range(1, sol.order + 1):
        for e, c in slices[m].terms.items():
            cleared = c.cleared(2 * m - 1)
            cert.add(check_true(f"V_{m}[{list(e)}] * P'_T^{2 * m - 1} in B", cleared is not None, power=c.k))
    problem = sol.problem
    n = problem.n
    ring = Localization(problem.PT)
    shift = {L: ring.element(D) for L, D in taylor_shift_table(problem.P).items()}
    last = sol.order if partial_sums is None else min(partial_sums, sol.order)
    for upto in range(1, last + 1):
        partial = {e: c for e, c in sol.U.terms.items() if sum(e) <= upto}
        top = upto + 2
        phi = _shift_slices(n, top, shift, partial, ring)
        for deg in range(upto + 1, top + 1):
            for e, c in phi[deg].items():
                cleared = c.cleared(2 * deg - 2)
                cert.add(check_true(f"Phi_U{upto} slice {deg}[{list(e)}] * P'_T^{2 * deg - 2} in B", cleared is not None))
    return cert


def _shift_slices(n: int, order: int, shift, U_terms: Mapping, ring: Localization) -> list[dict]:
    """Homogeneous slices 0..order of sum_L D^L P X^theta U^m."""
    xvars = tuple(f"X{k + 1}" for k in range(n))
    U = TruncatedSeries(xvars, order, U_terms)
    one = ring.element(ring.den ** 0)
    powers = [TruncatedSeries(xvars, order, {(0,) * n: one})]
    maxm = max((L[n] for L in shift), default=0)
    for _ in range(maxm):
        powers.append(powers[-1] * U)
    out: list[dict] = [{} for _ in range(order + 1)]
    for L, coef in shift.items():
        theta, m = L[:n], L[n]
        for e, c in powers[m].terms.items():
            t = mi_add(e, theta)
            deg = sum(t)
            if deg <= order:
                p = coef * c
                out[deg][t] = out[deg][t] + p if t in out[deg] else p
    return [{e: c for e, c in s.items() if c} for s in out]


# ---------------------------------------------------------------- local coefficient and height bounds


def gauss_weil_v(values, v: Place) -> mpq:
    """max |c|_v over a family of rationals."""
    return max((abs_v(c, v) for c in values), default=mpq(0))


def projective_height_exp(values) -> mpq:
    """exp h(values) = prod_v max_i |x_i|_v over all places (an exact rational)."""
    values = [Q(c) for c in values if Q(c) != 0]
    if not values:
        raise ValueError("projective point with all coordinates zero")
    out = mpq(1)
    for v in relevant_places(values):
        out *= gauss_weil_v(values, v)
    return out


def normalize_unit_coefficient(P: SparsePolynomial) -> tuple[SparsePolynomial, mpq]:
    """Return (P / c, c) where c = 1 if some coefficient already equals 1,
    else c is the graded-lex-leading coefficient."""
    if any(c == 1 for c in P.terms.values()):
        return P, mpq(1)
    c = P.leading_term()[1]
    return P.scale(1 / c), c


def lemma_2_5_factor(problem: ImplicitProblem, v: Place, P: SparsePolynomial | None = None) -> mpq:
    """The base raised to the power m in the local bound at v."""
    P = P if P is not None else normalize_unit_coefficient(problem.P)[0]
    n, d = problem.n, problem.d
    H_P = gauss_weil_v(P.terms.values(), v)
    H_x = gauss_weil_v((1,) + problem.base_point, v)
    inv = abs_v(1 / problem.PT.evaluate(problem.base_point), v)
    base = H_P**2 * H_x ** (2 * (d - 1)) * max(mpq(1), inv) ** 2
    if v.is_infinite:
        base *= 8 * n * d**3 * (d + 1) ** (2 * (n + 1))
    return base


def verify_lemma_2_5_bounds(problem: ImplicitProblem, m: int, places: Sequence[Place] | None = None,
                            taylor: Mapping[MultiIndex, mpq] | None = None) -> Certification:
    """Local bounds at each place and the global height bound, for |I| <= m."""
    if m < 0:
        raise ValueError("m must be non-negative")
    Pn, scale = normalize_unit_coefficient(problem.P)
    a = taylor if taylor is not None else taylor_coefficients(problem, m)
    a = {I: c for I, c in a.items() if sum(I) <= m}
    values = list(a.values())
    if places is None:
        places = relevant_places(list(Pn.terms.values()) + list(problem.base_point) + [c for c in values if c] + [1])
    cert = Certification("local-and-height-bounds", info={"rescaled_by": scale, "m": m})
    H_x = {v: gauss_weil_v((1,) + problem.base_point, v) for v in places}
    for v in places:
        lhs = max([mpq(1)] + [abs_v(c, v) for c in values])
        rhs = lemma_2_5_factor(problem, v, Pn) ** m * H_x[v]
        cert.add(check_le(f"local bound at {v}", lhs, rhs, place=str(v)))
    if m == 0:
        # The slope term drops out, so the bound compares two heights of rationals exactly.
        cert.add(check_le("height bound (exp)", projective_height_exp([1] + values),
                          projective_height_exp((1,) + problem.base_point)))
        return cert
    # Height bound: both sides on log scale.
    lhs_h = log_rational(projective_height_exp([1] + values))
    h_tilde = log_rational(projective_height_exp(Pn.terms.values()))
    h_x = log_rational(projective_height_exp((1,) + problem.base_point))
    n, d = problem.n, problem.d
    slope = 4 * h_tilde + 4 * (d - 1) * h_x + (4 * n + 9) * (mpmath.log(d) + 1)
    rhs_h = slope * m + h_x
    cert.add(check_le("height bound", LogValue(lhs_h), LogValue(rhs_h), numeric_slack(lhs_h, rhs_h)))
    return cert


# ---------------------------------------------------------------- group charts


@dataclass
class ParametrizedGroupChart:
    """Normalized local equations of a g-dimensional group in P_N near e.

    ``forms[i]`` (i = g+1..N) is a form in (X_0, ..., X_g, X_i); ``e`` is the
    neutral point with e[0] = 1.
    """

    g: int
    N: int
    forms: dict[int, SparsePolynomial]
    e: tuple
    dG: int | None = None

    def __post_init__(self) -> None:
        self.e = tuple(Q(c) for c in self.e)
        if len(self.e) != self.N + 1 or self.e[0] != 1:
            raise ValueError("neutral point needs N+1 coordinates with e_0 = 1")
        if set(self.forms) != set(range(self.g + 1, self.N + 1)):
            raise ValueError("one defining form is required for each i = g+1..N")
        for i, F in self.forms.items():
            if F.nvars != self.g + 2:
                raise ValueError(f"form {i} must be in the variables X_0..X_g, X_{i}")
            if not F.is_homogeneous():
                raise ValueError(f"form {i} is not homogeneous")
            if not any(c == 1 for c in F.terms.values()):
                raise ValueError(f"form {i} has no coefficient equal to 1")
            self.problem(i)  # checks vanishing and the non-zero derivative
        if self.dG is None:
            self.dG = max([int(F.total_degree) for F in self.forms.values()] + [1])

    def problem(self, i: int) -> ImplicitProblem:
        F = self.forms[i]
        names = tuple(f"X{k}" for k in range(1, self.g + 1)) + (f"X{i}",)
        terms = {e[1:]: c for e, c in F.terms.items()}
        P = SparsePolynomial(names, terms)
        point = self.e[1 : self.g + 1] + (self.e[i],)
        return ImplicitProblem(P, point, max(int(P.total_degree), 1))

    def to_json(self) -> dict:
        from .exact import format_rational

        return {
            "g": self.g,
            "N": self.N,
            "forms": {str(i): F.to_json() for i, F in sorted(self.forms.items())},
            "e": [format_rational(c) for c in self.e],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ParametrizedGroupChart":
        forms = {int(i): SparsePolynomial.from_json(F) for i, F in data.get("forms", {}).items()}
        return cls(int(data["g"]), int(data["N"]), forms, tuple(Q(str(c)) for c in data["e"]))


def parametrize_group_chart(chart: ParametrizedGroupChart, order: int) -> dict[int, dict[MultiIndex, mpq]]:
    """Table i -> (I -> a_I^(i)) for |I| <= order and i = 0..N."""
    g = chart.g
    out: dict[int, dict[MultiIndex, mpq]] = {}
    zero = (0,) * g
    for i in range(chart.N + 1):
        row = {I: mpq(0) for I in indices_up_to(g, order)}
        if i == 0:
            row[zero] = mpq(1)
        elif i <= g:
            row[zero] = chart.e[i]
            if order >= 1:
                row[unit(g, i - 1)] = mpq(1)
        else:
            row.update(taylor_coefficients(chart.problem(i), order))
        out[i] = row
    return out


def lemma_3_1_factor(chart: ParametrizedGroupChart, v: Place) -> mpq:
    """F_v: the quantity raised to |I| in the local coefficient bound of a chart."""
    g, dG = chart.g, chart.dG
    H_e = gauss_weil_v(chart.e, v)
    base = H_e ** (2 * (dG - 1))
    for i, F in chart.forms.items():
        prob = chart.problem(i)
        inv = abs_v(1 / prob.PT.evaluate(prob.base_point), v)
        base *= gauss_weil_v(F.terms.values(), v) ** 2 * max(mpq(1), inv) ** 2
    if v.is_infinite:
        base *= 8 * g * dG**3 * (dG + 1) ** (2 * (g + 1))
    return base


def verify_lemma_3_1_bounds(chart: ParametrizedGroupChart, order: int, places: Sequence[Place] | None = None,
                            table: dict | None = None) -> Certification:
    table = table or parametrize_group_chart(chart, order)
    if places is None:
        vals = [c for row in table.values() for c in row.values() if c] + list(chart.e)
        for F in chart.forms.values():
            vals += list(F.terms.values())
        places = relevant_places(vals + [1])
    cert = Certification("chart-coefficient-bounds")
    for v in places:
        F = lemma_3_1_factor(chart, v)
        H_e = gauss_weil_v(chart.e, v)
        for i, row in table.items():
            for I, a in row.items():
                lhs = max(mpq(1), abs_v(a, v))
                cert.add(check_le(f"a_{list(I)}^({i}) at {v}", lhs, F ** sum(I) * H_e, place=str(v), i=i, I=list(I)))
    return cert


# ---------------------------------------------------------------- projective-space constants


def projective_space_height(n: int) -> mpq:
    """h(P_n) = ((n+1)/2) * sum_{k=2}^{n+1} 1/k, exact."""
    s = sum((mpq(1, k) for k in range(2, n + 2)), mpq(0))
    return mpq(n + 1, 2) * s


def psi(n: int) -> mpmath.mpf:
    """(n+1) log 2 - h(P_n)."""
    if n < 0:
        raise ValueError("psi is defined for n >= 0")
    h = projective_space_height(n)
    return (n + 1) * mpmath.log(2) - mpmath.mpf(int(h.numerator)) / int(h.denominator)


def psi_sweep(n_max: int) -> Iterator[tuple[int, mpq, mpmath.mpf]]:
    """(n, h(P_n), psi(n)) for n = 0..n_max, the harmonic sum kept exactly and extended one term at a time."""
    harmonic = mpq(0)  # sum_{k=2}^{n+1} 1/k
    log2 = mpmath.log(2)
    for n in range(n_max + 1):
        harmonic += mpq(1, n + 1) if n else 0
        h = mpq(n + 1, 2) * harmonic
        yield n, h, (n + 1) * log2 - mpmath.mpf(int(h.numerator)) / int(h.denominator)


def lemma_5_9_bound(N: int, g: int, dG, hG, h_e) -> mpmath.mpf:
    """f(N, G, e) = 4(N-g)h(G) + [2(N-g+1)h(e) + 4(N-g)]d(G)
    + (N-g+1)(2g+5)(log d(G) + 1) - 2(N-g+1)h(e)."""
    if not (N >= g >= 1):
        raise ValueError("need N >= g >= 1")
    if dG < 1:
        raise ValueError("need d(G) >= 1")
    hG, h_e = mpmath.mpf(_num(hG)), mpmath.mpf(_num(h_e))
    c = N - g
    return (4 * c * hG + (2 * (c + 1) * h_e + 4 * c) * dG
            + (c + 1) * (2 * g + 5) * (mpmath.log(dG) + 1) - 2 * (c + 1) * h_e)


def _num(x):
    if hasattr(x, "numerator") and hasattr(x, "denominator") and not isinstance(x, int):
        return mpmath.mpf(int(x.numerator)) / int(x.denominator)
    return x

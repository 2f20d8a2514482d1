"""Delta operators on powers of the multiplicative group, vanishing with
multiplicity, the Segre-Veronese reduction and the coefficient-table bounds.

Block l of G = G_m^{n_1} x ... x G_m^{n_p} sits in P_{n_l} as (1 : x_1 : ...),
with addition X_i Y_i and local parameters X_i = 1 + T_i (i >= 1).  A
multi-index I over N^g lists the T-exponents block by block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import mpmath
from gmpy2 import mpq

from . import bounds
from .certify import Certification, check_le, check_true, numeric_slack
from .exact import INF, LogValue, Place, Q, abs_v, format_rational, log_rational, relevant_places
from .implicit import (ParametrizedGroupChart, gauss_weil_v, lemma_3_1_factor, projective_height_exp,
                       projective_space_height)
from .poly import (MultiIndex, SparsePolynomial, TruncatedSeries, indices_below, indices_up_to, mi_add,
                   mi_binom, mi_le, substitute)
from .staircase import Staircase, block_lengths, compositions


def _name(prefix: str, p: int, l: int, i: int) -> str:
    return f"{prefix}{i}" if p == 1 else f"{prefix}{l + 1}_{i}"


@dataclass(frozen=True)
class MultiplicativeGroupModel:
    """G_m^{n_1} x ... x G_m^{n_p} in P_{n_1} x ... x P_{n_p}."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if not dims or any(n < 1 for n in dims):
            raise ValueError("block dimensions must be positive")
        object.__setattr__(self, "dims", dims)

    @property
    def p(self) -> int:
        return len(self.dims)

    @property
    def g(self) -> int:
        return sum(self.dims)

    @property
    def g_blocks(self) -> tuple[int, ...]:
        return self.dims

    c = 1
    c_prime = 1

    def x_vars(self, prefix: str = "X") -> tuple[str, ...]:
        return tuple(_name(prefix, self.p, l, i) for l, n in enumerate(self.dims) for i in range(n + 1))

    def y_vars(self) -> tuple[str, ...]:
        return self.x_vars("Y")

    def t_vars(self) -> tuple[str, ...]:
        return tuple(_name("T", self.p, l, i) for l, n in enumerate(self.dims) for i in range(1, n + 1))

    def coordinate_blocks(self) -> list[list[int]]:
        """Positions of each block's projective coordinates in ``x_vars``."""
        out, pos = [], 0
        for n in self.dims:
            out.append(list(range(pos, pos + n + 1)))
            pos += n + 1
        return out

    def affine_positions(self) -> list[int]:
        """Positions (in ``x_vars``) of the coordinates carrying a T-parameter."""
        return [b[i] for b in self.coordinate_blocks() for i in range(1, len(b))]

    def lift(self, I: Sequence[int]) -> MultiIndex:
        """A T-multi-index as an exponent over all projective coordinates (zeros at X_l0)."""
        if len(I) != self.g:
            raise ValueError(f"multi-index {tuple(I)} needs arity {self.g}")
        out = [0] * sum(n + 1 for n in self.dims)
        for pos, a in zip(self.affine_positions(), I):
            out[pos] = a
        return tuple(out)

    def addition_law(self) -> list[list[SparsePolynomial]]:
        """Per block, the forms X_i Y_i as polynomials in X and Y."""
        xs, ys = self.x_vars(), self.y_vars()
        vs = xs + ys
        gens = SparsePolynomial.generators(vs)
        k = len(xs)
        return [[gens[j] * gens[k + j] for j in b] for b in self.coordinate_blocks()]

    def neutral(self) -> list[tuple[mpq, ...]]:
        return [tuple(mpq(1) for _ in range(n + 1)) for n in self.dims]

    def invariants(self) -> dict:
        law = [c for block in self.addition_law() for F in block for c in F.terms.values()]
        return {
            "h_A": log_rational(projective_height_exp(law)),
            "h_e": [log_rational(projective_height_exp(e)) for e in self.neutral()],
            "d_G": [1] * self.p,
            "h_G": [projective_space_height(n) for n in self.dims],
        }

    def bound_scalars(self, delta_blocks: Sequence | None = None) -> dict:
        """Group scalars for the bound evaluators.

        A single block is used directly in P_n (N = n, E = s = 1).  Several
        blocks go through the Segre-Veronese map of multidegree ``delta_blocks``
        (N = card - 1, E = 1, s = 2).
        """
        out = {
            "g": self.g, "p": self.p, "n": self.g, "c": 1, "c_prime": 1,
            "n_blocks": list(self.dims), "g_blocks": list(self.dims), "d_G": [1] * self.p,
            "h_G_blocks": [projective_space_height(n) for n in self.dims],
            "h_e_blocks": [0] * self.p, "h_A_blocks": [0] * self.p,
            "h_A": 0, "h_e": 0, "E": [1] * self.p,
        }
        if self.p == 1 and delta_blocks is None:
            out.update(N=self.dims[0], deg_G=1, d_G=[1], h_G=projective_space_height(self.dims[0]),
                       s=1, delta_blocks=[1])
        elif delta_blocks is not None:
            smap = SegreVeroneseMap(self, tuple(int(d) for d in delta_blocks))
            out.update(N=smap.expected_card() - 1, s=2, delta_blocks=list(smap.delta), deg_G=smap.image_degree())
        return out

    def to_json(self) -> dict:
        return {"dims": list(self.dims)}


# ---------------------------------------------------------------- multiforms


@dataclass(frozen=True)
class MultiForm:
    model: MultiplicativeGroupModel
    P: SparsePolynomial
    multidegree: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.P.vars != self.model.x_vars():
            raise ValueError(f"a form on this model uses the variables {self.model.x_vars()}")
        if self.P.is_zero():
            raise ValueError("the zero polynomial has no multidegree")
        blocks = self.model.coordinate_blocks()
        degs = {tuple(sum(e[i] for i in b) for b in blocks) for e in self.P.terms}
        if len(degs) != 1:
            raise ValueError("polynomial is not multihomogeneous for the block structure")
        found = degs.pop()
        if self.multidegree and tuple(self.multidegree) != found:
            raise ValueError(f"multidegree {found} differs from the declared {tuple(self.multidegree)}")
        object.__setattr__(self, "multidegree", found)

    def to_json(self) -> dict:
        return {"model": self.model.to_json(), "P": self.P.to_json(), "multidegree": list(self.multidegree)}


def as_multiform(model: MultiplicativeGroupModel, P) -> MultiForm:
    return P if isinstance(P, MultiForm) else MultiForm(model, P)


def _polynomial(model: MultiplicativeGroupModel, P) -> SparsePolynomial:
    """The underlying polynomial; Delta acts on arbitrary polynomials, not only forms."""
    P = P.P if isinstance(P, MultiForm) else P
    if P.vars != model.x_vars():
        raise ValueError(f"expected variables {model.x_vars()}")
    return P


# ---------------------------------------------------------------- delta operators


def delta_operator(model: MultiplicativeGroupModel, P, I: Sequence[int]) -> SparsePolynomial:
    """Delta^I P = sum_j c_j prod binom(j_i, I_i) Y^j (closed form)."""
    P = _polynomial(model, P)
    full = model.lift(I)
    out = {}
    for e, c in P.terms.items():
        b = mi_binom(e, full)
        if b:
            out[e] = c * b
    return SparsePolynomial(model.y_vars(), out)


def delta_expansion(model: MultiplicativeGroupModel, P) -> dict[MultiIndex, SparsePolynomial]:
    """All nonzero Delta^I P by substituting X_l0 -> Y_l0, X_li -> Y_li (1 + T_li) into P."""
    P = _polynomial(model, P)
    ys, ts = model.y_vars(), model.t_vars()
    ring = ys + ts
    gens = dict(zip(ring, SparsePolynomial.generators(ring)))
    images = {}
    ti = iter(ts)
    for l, n in enumerate(model.dims):
        for i in range(n + 1):
            y = gens[_name("Y", model.p, l, i)]
            images[_name("X", model.p, l, i)] = y if i == 0 else y * (1 + gens[next(ti)])
    expanded = substitute(P, images)
    k = len(ys)
    out: dict[MultiIndex, dict] = {}
    for e, c in expanded.terms.items():
        out.setdefault(e[k:], {})[e[:k]] = c
    return {I: SparsePolynomial(ys, terms) for I, terms in out.items()}


def delta_by_substitution(model: MultiplicativeGroupModel, P, I: Sequence[int]) -> SparsePolynomial:
    return delta_expansion(model, P).get(tuple(I), SparsePolynomial.zero(model.y_vars()))


def _as_x(model: MultiplicativeGroupModel, Q_: SparsePolynomial) -> SparsePolynomial:
    return Q_.with_vars(model.x_vars())


def verify_delta_identities(model: MultiplicativeGroupModel, P, Q_, I: Sequence[int]) -> Certification:
    """Additivity and the Leibniz convolution, checked exactly."""
    P, Q_ = _polynomial(model, P), _polynomial(model, Q_)
    I = tuple(I)
    cert = Certification("delta-identities", info={"I": list(I)})
    lhs = delta_operator(model, P + Q_, I)
    rhs = delta_operator(model, P, I) + delta_operator(model, Q_, I)
    diff = lhs - rhs
    cert.add(check_true("Delta(P+Q) = Delta P + Delta Q", diff.is_zero(),
                        **({"difference": str(diff)} if diff else {})))
    lhs = delta_operator(model, P * Q_, I)
    rhs = SparsePolynomial.zero(model.y_vars())
    for I1 in indices_below(I):
        I2 = tuple(a - b for a, b in zip(I, I1))
        rhs = rhs + delta_operator(model, P, I1) * delta_operator(model, Q_, I2)
    diff = lhs - rhs
    cert.add(check_true("Delta(PQ) = sum Delta^I1 P Delta^I2 Q", diff.is_zero(),
                        **({"difference": str(diff)} if diff else {})))
    return cert


# ---------------------------------------------------------------- vanishing


@dataclass
class VanishingResult:
    vanishes: bool
    witnesses: list[tuple[MultiIndex, mpq]]
    oracle_agrees: bool

    def to_json(self) -> dict:
        return {
            "vanishes": self.vanishes,
            "witnesses": [{"I": list(I), "value": str(v)} for I, v in self.witnesses],
            "oracle_agrees": self.oracle_agrees,
        }


def _flatten_point(model: MultiplicativeGroupModel, x) -> list[mpq]:
    if len(x) == model.p and all(isinstance(b, (list, tuple)) for b in x):
        flat = [Q(c) for b in x for c in b]
    else:
        flat = [Q(c) for c in x]
    if len(flat) != len(model.x_vars()):
        raise ValueError(f"point needs {len(model.x_vars())} coordinates")
    if any(c == 0 for c in flat):
        raise ValueError("point is not on the torus (a coordinate is zero)")
    return flat


def translated_taylor(model: MultiplicativeGroupModel, P, x) -> SparsePolynomial:
    """P(x_l0, x_li (1 + T_li)) as a polynomial in the T variables."""
    P = _polynomial(model, P)
    flat = _flatten_point(model, x)
    ts = model.t_vars()
    gens = SparsePolynomial.generators(ts)
    images = {}
    k = 0
    for pos, name in enumerate(model.x_vars()):
        if pos in model.affine_positions():
            images[name] = (1 + gens[k]) * flat[pos]
            k += 1
        else:
            images[name] = SparsePolynomial.constant(ts, flat[pos])
    return substitute(P, images)


def vanishing_multiplicity_check(model: MultiplicativeGroupModel, P, x, W: Staircase) -> VanishingResult:
    """(Delta^I P)(x) for each I in W, cross-checked against the translated Taylor expansion."""
    P = _polynomial(model, P)
    flat = _flatten_point(model, x)
    if W.members and W.g != model.g:
        raise ValueError(f"staircase arity {W.g} differs from dim G = {model.g}")
    taylor = translated_taylor(model, P, flat) if W.members else None
    witnesses, agree = [], True
    for I in W.sorted():
        value = delta_operator(model, P, I).evaluate(flat)
        if value != 0:
            witnesses.append((I, value))
        if taylor.coefficient(I) != value:
            agree = False
    return VanishingResult(not witnesses, witnesses, agree)


# ---------------------------------------------------------------- composition


def membership_constants(I: Sequence[int], J: Sequence[int]) -> dict[MultiIndex, mpq]:
    """c_L with binom(j,I) binom(j,J) = sum_{L <= I+J} c_L binom(j,L) for all j.

    Solved by forward substitution on the box [0, I+J], whose matrix
    binom(j, L) is unitriangular for the componentwise order.
    """
    I, J = tuple(I), tuple(J)
    top = mi_add(I, J)
    box = sorted(indices_below(top), key=lambda L: (sum(L), L))
    c: dict[MultiIndex, mpq] = {}
    for j in box:
        acc = mpq(mi_binom(j, I) * mi_binom(j, J))
        for L, cL in c.items():
            if cL and mi_le(L, j):
                acc -= cL * mi_binom(j, L)
        c[j] = acc
    return {L: v for L, v in c.items() if v}


def membership_constants_closed(I: Sequence[int], J: Sequence[int]) -> dict[MultiIndex, mpq]:
    """Per coordinate binom(x,a) binom(x,b) = sum_k binom(k,a) binom(a,k-b) binom(x,k)."""
    per_coord = []
    for a, b in zip(I, J):
        per_coord.append({k: math.comb(k, a) * math.comb(a, k - b) for k in range(max(a, b), a + b + 1)})
    out = {}
    for combo in product(*(list(d.items()) for d in per_coord)):
        coef = 1
        for _, v in combo:
            coef *= v
        if coef:
            out[tuple(k for k, _ in combo)] = mpq(coef)
    return out


@dataclass
class MembershipResult:
    constants: dict[MultiIndex, mpq]
    verified: bool
    residual: SparsePolynomial

    def to_json(self) -> dict:
        return {
            "constants": [{"L": list(L), "c": str(c)} for L, c in sorted(self.constants.items())],
            "verified": self.verified,
            "residual": str(self.residual),
        }


def delta_composition_membership(model: MultiplicativeGroupModel, P, I: Sequence[int], J: Sequence[int]) -> MembershipResult:
    P = _polynomial(model, P)
    I, J = tuple(I), tuple(J)
    consts = membership_constants(I, J)
    lhs = delta_operator(model, _as_x(model, delta_operator(model, P, J)), I)
    rhs = SparsePolynomial.zero(model.y_vars())
    for L, cL in consts.items():
        rhs = rhs + delta_operator(model, P, L).scale(cL)
    residual = lhs - rhs
    return MembershipResult(consts, residual.is_zero(), residual)


# ---------------------------------------------------------------- Segre-Veronese


@dataclass(frozen=True)
class SegreVeroneseMap:
    """rho: (X_1, ..., X_p) -> all monomials of multidegree delta, in graded-lex order."""

    model: MultiplicativeGroupModel
    delta: tuple[int, ...]

    def __post_init__(self):
        delta = tuple(int(d) for d in self.delta)
        if len(delta) != self.model.p or any(d < 0 for d in delta):
            raise ValueError("one non-negative degree per block is required")
        object.__setattr__(self, "delta", delta)

    @property
    def index_set(self) -> list[MultiIndex]:
        per_block = [list(compositions(d, n + 1)) for d, n in zip(self.delta, self.model.dims)]
        members = [sum(parts, ()) for parts in product(*per_block)]
        return sorted(members, reverse=True)

    @property
    def card(self) -> int:
        return len(self.index_set)

    @property
    def N(self) -> int:
        return self.card - 1

    def expected_card(self) -> int:
        return math.prod(math.comb(n + d, d) for n, d in zip(self.model.dims, self.delta))

    def image_degree(self) -> int:
        """Degree of the image of P_{n_1} x ... x P_{n_p}: g! prod delta_l^{n_l} / n_l!."""
        out = math.factorial(self.model.g)
        for n, d in zip(self.model.dims, self.delta):
            out = out * d**n
        for n in self.model.dims:
            out //= math.factorial(n)
        return out

    def z_vars(self) -> tuple[str, ...]:
        return tuple(f"Z{k}" for k in range(self.card))

    def embed_point(self, x) -> tuple[mpq, ...]:
        flat = _flat(x)
        out = []
        for alpha in self.index_set:
            v = mpq(1)
            for c, a in zip(flat, alpha):
                if a:
                    v *= c**a
            out.append(v)
        return tuple(out)

    def linear_form(self, P) -> "LinearForm":
        form = as_multiform(self.model, P)
        if form.multidegree != self.delta:
            raise ValueError(f"multidegree {form.multidegree} differs from the map's {self.delta}")
        position = {alpha: k for k, alpha in enumerate(self.index_set)}
        coeffs = [mpq(0)] * self.card
        for e, c in form.P.terms.items():
            coeffs[position[e]] = c
        return LinearForm(self.z_vars(), tuple(coeffs))

    def chart_table(self, order: int) -> dict[int, dict[MultiIndex, mpq]]:
        """phi(Z_alpha) = prod (1 + T_li)^{alpha_li}: a_I = prod binom(alpha_li, I_li)."""
        out = {}
        for k, alpha in enumerate(self.index_set):
            row = {}
            for I in indices_up_to(self.model.g, order):
                b = mi_binom(alpha, self.model.lift(I))
                if b:
                    row[I] = mpq(b)
            out[k] = row
        return out

    def to_json(self) -> dict:
        return {"dims": list(self.model.dims), "delta": list(self.delta), "card": self.card, "N": self.N,
                "index_set": [list(a) for a in self.index_set]}


@dataclass(frozen=True)
class LinearForm:
    """sum c_k Z_k, stored densely: the Segre-Veronese target usually has more
    coordinates than a sparse polynomial may carry."""

    vars: tuple[str, ...]
    coeffs: tuple

    def evaluate(self, point: Sequence) -> mpq:
        if len(point) != len(self.coeffs):
            raise ValueError(f"point needs {len(self.coeffs)} coordinates")
        return sum((c * Q(x) for c, x in zip(self.coeffs, point) if c), mpq(0))

    @property
    def terms(self) -> dict[MultiIndex, mpq]:
        n = len(self.coeffs)
        return {tuple(int(j == k) for j in range(n)): c for k, c in enumerate(self.coeffs) if c}

    def to_json(self) -> dict:
        n = len(self.coeffs)
        return {"vars": list(self.vars),
                "terms": [{"exp": [int(j == k) for j in range(n)], "coef": format_rational(c)}
                          for k, c in enumerate(self.coeffs) if c]}


def segre_veronese(smap: SegreVeroneseMap, x_or_P):
    """rho(x) for a point, L_P for a form."""
    if isinstance(x_or_P, (MultiForm, SparsePolynomial)):
        return smap.linear_form(x_or_P)
    return smap.embed_point(x_or_P)


def verify_segre_roundtrip(smap: SegreVeroneseMap, P, points: Sequence) -> Certification:
    form = as_multiform(smap.model, P)
    L = smap.linear_form(form)
    cert = Certification("segre-roundtrip", info={"card": smap.card, "N": smap.N})
    cert.add(check_true("card = prod binom(n+delta, delta)", smap.card == smap.expected_card()))
    for x in points:
        flat = _flat(x)
        cert.add(check_true("L_P(rho(x)) = P(x)", L.evaluate(smap.embed_point(flat)) == form.P.evaluate(flat),
                            x=[str(c) for c in flat]))
    cert.add(check_true("h~(L_P) = h~(P)", projective_height_exp([c for c in L.coeffs if c])
                        == projective_height_exp(form.P.terms.values())))
    return cert


def _flat(x) -> list[mpq]:
    if x and all(isinstance(b, (list, tuple)) for b in x):
        return [Q(c) for b in x for c in b]
    return [Q(c) for c in x]


# ---------------------------------------------------------------- coefficient tables


@dataclass(frozen=True)
class Hypothesis125:
    """Data of the local coefficient hypothesis for a chart table with N+1 rows.

    ``E[l]`` maps places to E_{l,v} (absent places mean 1), ``e[l]`` is the
    block's neutral point and ``t`` its block structure on N^g.
    """

    g_blocks: tuple[int, ...]
    delta_blocks: tuple[int, ...]
    s: mpq
    E: tuple
    e: tuple

    @property
    def p(self) -> int:
        return len(self.g_blocks)

    @property
    def g(self) -> int:
        return sum(self.g_blocks)

    def E_v(self, l: int, v: Place) -> mpq:
        return Q(self.E[l].get(v, 1))

    def s_v(self, v: Place) -> mpq:
        return Q(self.s) if v.is_infinite else mpq(1)

    def t(self, I: Sequence[int]) -> tuple[int, ...]:
        return block_lengths(tuple(I), self.g_blocks)

    def places(self) -> set[Place]:
        out = {INF}
        for d in self.E:
            out |= set(d)
        for pt in self.e:
            out |= set(relevant_places(list(pt) + [1]))
        return out

    def log_E(self, l: int) -> mpmath.mpf:
        return mpmath.fsum(log_rational(Q(x)) for x in self.E[l].values())

    def h_e(self, l: int) -> mpmath.mpf:
        return log_rational(projective_height_exp(self.e[l]))

    def scalars(self, **extra) -> dict:
        return {"g": self.g, "g_blocks": list(self.g_blocks), "delta_blocks": list(self.delta_blocks),
                "s": self.s, "E": [mpmath.exp(self.log_E(l)) for l in range(self.p)],
                "h_e_blocks": [self.h_e(l) for l in range(self.p)], **extra}

    @classmethod
    def for_chart(cls, chart: ParametrizedGroupChart, s=1, places: Sequence[Place] | None = None) -> "Hypothesis125":
        """p = 1, delta_1 = 1, E_v from the local factor of the chart, t_1 = |I|."""
        if places is None:
            vals = list(chart.e) + [c for F in chart.forms.values() for c in F.terms.values()]
            for i in chart.forms:
                prob = chart.problem(i)
                vals.append(prob.PT.evaluate(prob.base_point))
            places = relevant_places([x for x in vals if x] + [1])
        E = {v: lemma_3_1_factor(chart, v) for v in places}
        return cls((chart.g,), (1,), Q(s), ({v: x for v, x in E.items() if x != 1},), (tuple(chart.e),))

    @classmethod
    def for_segre(cls, smap: SegreVeroneseMap, s=2) -> "Hypothesis125":
        model = smap.model
        return cls(model.g_blocks, smap.delta, Q(s), tuple({} for _ in model.dims), tuple(model.neutral()))


def _local_rhs(data: Hypothesis125, v: Place, k: int, m: Sequence[int]) -> mpq:
    out = data.s_v(v) ** (k * sum(g * d for g, d in zip(data.g_blocks, data.delta_blocks)))
    for l in range(data.p):
        out *= data.E_v(l, v) ** m[l] * gauss_weil_v(data.e[l], v) ** (k * data.delta_blocks[l])
    return out


def _height_rhs_exp(data: Hypothesis125, k: int, m: Sequence[int], two_power: int = 0) -> mpq:
    """exp of the height bound, exactly: 2^two_power prod_l E_l^{m_l} (s^{g_l} H(e_l))^{k delta_l}."""
    out = mpq(2) ** two_power
    for l in range(data.p):
        E = mpq(1)
        for x in data.E[l].values():
            E *= Q(x)
        out *= E ** m[l] * (Q(data.s) ** data.g_blocks[l] * projective_height_exp(data.e[l])) ** (k * data.delta_blocks[l])
    return out


def _height_checks(cert: Certification, label: str, lhs_exp: mpq, rhs_exp: mpq, formula) -> None:
    """Compare the heights exactly through their exponentials, and tie the evaluator to that exact value."""
    cert.add(check_le(f"exp {label}", lhs_exp, rhs_exp))
    exact_log = log_rational(rhs_exp)
    cert.add(check_le(f"evaluator for {label} matches the exact value", abs(formula - exact_log),
                      numeric_slack(formula, exact_log)))


def _table_places(table, data: Hypothesis125, order: int) -> list[Place]:
    vals = [c for row in table.values() for I, c in row.items() if c and sum(I) <= order]
    return sorted(set(relevant_places(vals + [1])) | data.places())


def verify_hypothesis_1_25(table: Mapping[int, Mapping], data: Hypothesis125, order: int,
                           places: Sequence[Place] | None = None) -> Certification:
    """|a_I^(i)|_v <= s_v^{sum g_l delta_l} prod E_{l,v}^{t_l(I)} prod H_v(e_l)^{delta_l}."""
    places = list(places) if places is not None else _table_places(table, data, order)
    cert = Certification("hypothesis-1.25", info={"order": order, "places": [str(v) for v in places]})
    for v in places:
        worst_margin, worst = None, None
        for i, row in table.items():
            for I, a in row.items():
                if sum(I) > order or not a:
                    continue
                rhs = _local_rhs(data, v, 1, data.t(I))
                margin = rhs - abs_v(a, v)
                if worst_margin is None or margin < worst_margin:
                    worst_margin, worst = margin, (i, I, abs_v(a, v), rhs)
        if worst is not None:
            i, I, lhs, rhs = worst
            cert.add(check_le(f"|a_I^(i)|_{v} (tightest: i={i}, I={list(I)})", lhs, rhs, place=str(v)))
    return cert


def prop_4_8_family_max(table, data: Hypothesis125, k: int, m: Sequence[int], v: Place) -> mpq:
    """max |a_{I_1}^{(i_1)} ... a_{I_k}^{(i_k)}|_v with t(I_1 + ... + I_k) <= m."""
    merged: dict[MultiIndex, mpq] = {}
    for row in table.values():
        for I, a in row.items():
            if a and abs_v(a, v) > merged.get(I, -1):
                merged[I] = abs_v(a, v)
    base: dict[tuple, mpq] = {}
    for I, av in merged.items():
        tau = data.t(I)
        if all(x <= y for x, y in zip(tau, m)) and av > base.get(tau, -1):
            base[tau] = av
    cur = dict(base)
    for _ in range(k - 1):
        nxt: dict[tuple, mpq] = {}
        for t1, x1 in cur.items():
            for t2, x2 in base.items():
                t = tuple(a + b for a, b in zip(t1, t2))
                if all(x <= y for x, y in zip(t, m)) and x1 * x2 > nxt.get(t, -1):
                    nxt[t] = x1 * x2
        cur = nxt
    return max(cur.values(), default=mpq(0))


def verify_prop_4_8(table, data: Hypothesis125, k: int, m: Sequence[int],
                    places: Sequence[Place] | None = None) -> Certification:
    m = list(m)
    order = sum(m)
    places = list(places) if places is not None else _table_places(table, data, order)
    cert = Certification("prop-4.8", info={"k": k, "m": m})
    total = mpq(1)
    for v in places:
        lhs = prop_4_8_family_max(table, data, k, m, v)
        cert.add(check_le(f"H_{v}(products)", lhs, _local_rhs(data, v, k, m), place=str(v)))
        if lhs:
            total *= lhs
    formula = bounds.prop_4_8_height_rhs(data.scalars(k=k, m=m))
    _height_checks(cert, "h(products)", total, _height_rhs_exp(data, k, m), formula)
    return cert


def coefficient_table_C(table: Mapping[int, Mapping], i: Sequence[int], order: int,
                        available: int | None = None) -> dict[MultiIndex, mpq]:
    """C(i, I) for |I| <= order: the coefficients of prod_j phi(X_j)^{i_j}."""
    i = tuple(i)
    if len(i) != len(table):
        raise ValueError(f"exponent needs {len(table)} entries")
    if available is not None and order > available:
        raise ValueError(f"table is known to order {available}, {order} requested")
    g = len(next(iter(table[0])))
    names = tuple(f"T{k + 1}" for k in range(g))
    one = TruncatedSeries(names, order, {(0,) * g: mpq(1)})
    acc = one
    for j, exp in enumerate(i):
        if exp:
            series = TruncatedSeries(names, order, {I: a for I, a in table[j].items() if sum(I) <= order})
            acc = acc * series**exp
    return {I: c for I, c in acc.terms.items() if c}


def cor_4_15_family(table, data: Hypothesis125, k: int, m: Sequence[int]) -> dict[tuple, dict[MultiIndex, mpq]]:
    order = sum(m)
    out = {}
    for i in compositions(k, len(table)):
        C = coefficient_table_C(table, i, order)
        out[i] = {I: c for I, c in C.items() if all(x <= y for x, y in zip(data.t(I), m))}
    return out


def verify_cor_4_15(table, data: Hypothesis125, k: int, m: Sequence[int],
                    places: Sequence[Place] | None = None) -> Certification:
    """Local bounds (with the 2^{m_1+...+m_p+g(k-1)} factor at infinity) and the height bound."""
    m = list(m)
    family = cor_4_15_family(table, data, k, m)
    values = [c for row in family.values() for c in row.values()]
    places = list(places) if places is not None else sorted(
        set(relevant_places(values + [1])) | data.places())
    cert = Certification("cor-4.15", info={"k": k, "m": m, "family_size": len(values)})
    total = mpq(1)
    for v in places:
        lhs = gauss_weil_v(values, v)
        rhs = _local_rhs(data, v, k, m)
        if v.is_infinite:
            rhs *= mpq(2) ** (sum(m) + data.g * (k - 1))
        cert.add(check_le(f"H_{v}(C)", lhs, rhs, place=str(v)))
        if lhs:
            total *= lhs
    formula = bounds.cor_4_15_height_rhs(data.scalars(k=k, m=m))
    _height_checks(cert, "h(C)", total, _height_rhs_exp(data, k, m, sum(m) + data.g * k), formula)
    return cert


# ---------------------------------------------------------------- heights of Delta families


def delta_family_height(model: MultiplicativeGroupModel, P, m: Sequence[int]) -> mpmath.mpf:
    """h~ of all coefficients of Delta^I P with t_l(I) <= m_l."""
    P = _polynomial(model, P)
    coeffs = []
    for I in product(*(range(mm + 1) for mm in _expand_blocks(model, m))):
        if all(t <= mm for t, mm in zip(block_lengths(I, model.dims), m)):
            coeffs.extend(delta_operator(model, P, I).terms.values())
    return log_rational(projective_height_exp(coeffs))


def _expand_blocks(model: MultiplicativeGroupModel, m: Sequence[int]) -> list[int]:
    return [m[l] for l, n in enumerate(model.dims) for _ in range(n)]


def verify_prop_4_16(model: MultiplicativeGroupModel, P, m: Sequence[int]) -> Certification:
    """h~(Delta^I P; t(I) <= m) against the evaluator, with scalars auto-filled from the model.

    One block: P is a form of degree delta on P_n.  Several blocks: P is read
    as the linear form L_P on P_N through the Segre-Veronese map.
    """
    form = as_multiform(model, P)
    m = list(m)
    if len(m) != model.p or any(x < 1 for x in m):
        raise ValueError("one positive m_l per block is required")
    if model.p == 1:
        scal = model.bound_scalars()
        scal["delta"] = form.multidegree[0]
    else:
        scal = model.bound_scalars(delta_blocks=form.multidegree)
        scal["delta"] = 1
    scal.update(m=m, h_P=log_rational(projective_height_exp(form.P.terms.values())))
    lhs = delta_family_height(model, form.P, m)
    rhs = bounds.prop_4_16_rhs(scal)
    cert = Certification("prop-4.16", info={"m": m, "N": scal["N"], "delta": scal["delta"]})
    cert.add(check_le("h~(Delta^I P; t(I) <= m)", lhs, rhs, numeric_slack(lhs, rhs)))
    return cert

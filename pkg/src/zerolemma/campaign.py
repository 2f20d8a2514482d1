"""Seeded instance generators and verification campaigns over every implemented bound."""

from __future__ import annotations

import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

import mpmath
from gmpy2 import mpq

from . import __version__
from .bounds import (
    condition_1_33,
    corollary_degree_rhs,
    corollary_height_rhs,
    corollary_hypotheses,
    thm_5_19_degree_rhs,
    thm_5_19_height_rhs,
)
from .certify import Certification, Verdict, check_le, check_true, numeric_slack, worst
from .exact import Place, Q, set_precision, to_jsonable
from .groups import (
    Hypothesis125,
    MultiForm,
    MultiplicativeGroupModel,
    SegreVeroneseMap,
    delta_by_substitution,
    delta_composition_membership,
    delta_operator,
    membership_constants_closed,
    verify_cor_4_15,
    verify_delta_identities,
    verify_hypothesis_1_25,
    verify_prop_4_16,
    verify_prop_4_8,
    verify_segre_roundtrip,
    vanishing_multiplicity_check,
)
from .implicit import (
    ImplicitProblem,
    ParametrizedGroupChart,
    lemma_5_9_bound,
    normalize_unit_coefficient,
    parametrize_group_chart,
    projective_space_height,
    psi,
    recursion_taylor,
    solve_series,
    verify_denominator_bounds,
    verify_lemma_2_1,
    verify_lemma_2_5_bounds,
    verify_lemma_3_1_bounds,
)
from .measures import check_comparison
from .poly import SparsePolynomial, indices_up_to, random_polynomial
from .rng import Xoshiro256, splitmix64
from .staircase import (
    SimplexStaircase,
    Staircase,
    compositions,
    functionals,
    lattice_volume,
    minkowski_sum,
    multiplicity_volume,
    sum_identity_report,
)

LEMMAS = (
    "1.1", "2.1", "2.3", "2.5", "3.1", "4.8", "4.15", "4.16", "delta-identities",
    "staircase-sum", "5.9-psi", "segre-roundtrip", "corollary-bounds",
)
KINDS = ("implicit", "polynomial", "chart", "multiform", "staircase", "segre", "corollary", "psi")
REJECTION_BUDGET = 10**4
CAP_LIMITS = {"n": 6, "d": 8, "box": 10**6}
_M64 = (1 << 64) - 1


@dataclass(frozen=True)
class Caps:
    """Size caps for generated instances: arity n, degree d, coefficient box."""

    n: int = 3
    d: int = 4
    box: int = 5

    def __post_init__(self):
        for name, limit in CAP_LIMITS.items():
            value = getattr(self, name)
            if not 1 <= value <= limit:
                raise ValueError(f"cap {name}={value} outside 1..{limit}")


@dataclass(frozen=True)
class CampaignConfig:
    seed: int = 0
    lemmas: tuple[str, ...] = LEMMAS
    instances: int = 50
    counts: dict = field(default_factory=dict)
    caps: Caps = field(default_factory=Caps)
    places: tuple[int, ...] | None = None
    precision_bits: int = 128
    order: int = 3
    quadrature_points: int = 1024
    unitary_samples: int = 100000
    workers: int = 1

    def __post_init__(self):
        unknown = [l for l in self.lemmas if l not in LEMMAS]
        if unknown:
            raise ValueError(f"unknown lemma keys {unknown}; choose from {list(LEMMAS)}")
        if self.instances < 0 or any(int(c) < 0 for c in self.counts.values()):
            raise ValueError("instance counts must be non-negative")
        if not 1 <= self.order <= 8:
            raise ValueError("order must be in 1..8")
        if not 0 <= self.seed <= _M64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def count(self, lemma: str) -> int:
        return int(self.counts.get(lemma, self.instances))

    def place_list(self) -> list[Place] | None:
        if self.places is None:
            return None
        return [Place(0)] + [Place.finite(p) for p in self.places]

    def to_json(self) -> dict:
        out = asdict(self)
        out["lemmas"] = list(self.lemmas)
        out["places"] = None if self.places is None else list(self.places)
        return out


def instance_seed(seed: int, lemma: str, index: int) -> int:
    """Seed of instance ``index`` of ``lemma``; independent of which other lemmas run."""
    state = (seed ^ (zlib.crc32(lemma.encode()) << 32)) & _M64
    state, _ = splitmix64(state)
    return splitmix64((state + index * 0x9E3779B97F4A7C15) & _M64)[1]


# ---------------------------------------------------------------- generators


@dataclass(frozen=True)
class Instance:
    kind: str
    seed: int
    caps: Caps
    data: object

    def to_json(self) -> dict:
        body = to_jsonable(self.data.to_json() if hasattr(self.data, "to_json") else self.data)
        return {"kind": self.kind, "seed": self.seed, "caps": asdict(self.caps), "data": body}


@dataclass(frozen=True)
class MultiformInstance:
    form: MultiForm
    point: tuple

    def to_json(self) -> dict:
        return {**self.form.to_json(), "point": [str(c) for c in self.point]}


@dataclass(frozen=True)
class CorollaryInstance:
    """Scalars for the final bound on G_m^{n_1} x ... x G_m^{n_p}."""

    dims: tuple[int, ...]
    delta_blocks: tuple[int, ...]
    eps: mpq
    dim_V: int
    h_P: mpq

    def scalars(self) -> dict:
        model = MultiplicativeGroupModel(self.dims)
        out = model.bound_scalars(delta_blocks=self.delta_blocks)
        out.update(delta_blocks=list(self.delta_blocks), eps=self.eps, dim_V=self.dim_V, h_P=self.h_P)
        return out

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "delta_blocks": list(self.delta_blocks), "eps": str(self.eps),
                "dim_V": self.dim_V, "h_P": str(self.h_P)}


def _draw(rng: Xoshiro256, make: Callable, what: str):
    for _ in range(REJECTION_BUDGET):
        out = make()
        if out is not None:
            return out
    raise RuntimeError(f"rejection budget of {REJECTION_BUDGET} draws exhausted for {what}")


def _gen_implicit(rng: Xoshiro256, caps: Caps) -> ImplicitProblem:
    n = rng.randint(1, min(caps.n, 3))
    d = rng.randint(1, caps.d)
    names = tuple(f"Y{k + 1}" for k in range(n)) + ("T",)

    def make():
        x = tuple(rng.randint(-2, 2) for _ in range(n + 1))
        Qp = random_polynomial(rng, names, d, caps.box, n_terms=rng.randint(2, 6))
        P = Qp - Qp.evaluate(x)
        # The forced root must keep the degree and the coefficient box.
        if P.total_degree != d or abs(P.coefficient((0,) * (n + 1))) > caps.box:
            return None
        if P.diff(n).evaluate(x) == 0:
            return None
        return ImplicitProblem(P, x, d)

    return _draw(rng, make, "implicit")


def _gen_polynomial(rng: Xoshiro256, caps: Caps) -> SparsePolynomial:
    """Univariate, bivariate, or a form in two or three variables; never a monomial."""
    shape = rng.randint(0, 3)
    d = rng.randint(1, caps.d)
    if shape == 0:
        names, homogeneous = ("X",), False
    elif shape == 1:
        names, homogeneous = ("X", "Y"), False
    else:
        names, homogeneous = tuple(f"X{k}" for k in range(min(shape, caps.n) + 1)), True

    def make():
        P = random_polynomial(rng, names, d, caps.box, n_terms=rng.randint(2, 6), homogeneous=homogeneous)
        return P if len(P.terms) >= 2 else None

    return _draw(rng, make, "polynomial")


def _gen_chart(rng: Xoshiro256, caps: Caps) -> ParametrizedGroupChart:
    g = rng.randint(1, min(caps.n, 2))
    N = g + rng.randint(0, 2)
    dG = rng.randint(1, min(caps.d, 3))
    e = (mpq(1),) + tuple(mpq(rng.choice((-2, -1, 1, 2)), rng.randint(1, 2)) for _ in range(N))
    forms = {}
    for i in range(g + 1, N + 1):
        names = tuple(f"X{k}" for k in range(g + 1)) + (f"X{i}",)
        point = e[: g + 1] + (e[i],)

        def make():
            F = random_polynomial(rng, names, dG, caps.box, n_terms=rng.randint(2, 5), homogeneous=True)
            F = F - SparsePolynomial(names, {(dG,) + (0,) * (g + 1): F.evaluate(point)})
            if F.is_zero() or F.diff(g + 1).evaluate(point) == 0:
                return None
            return normalize_unit_coefficient(F)[0]

        forms[i] = _draw(rng, make, "chart form")
    return ParametrizedGroupChart(g, N, forms, e, dG)


def _random_model(rng: Xoshiro256, caps: Caps, max_blocks: int = 2, max_dim: int = 2) -> MultiplicativeGroupModel:
    p = rng.randint(1, max_blocks)
    return MultiplicativeGroupModel(tuple(rng.randint(1, min(caps.n, max_dim)) for _ in range(p)))


def _random_multiform(rng: Xoshiro256, model: MultiplicativeGroupModel, multidegree: Sequence[int], box: int,
                      n_terms: int) -> SparsePolynomial:
    pool = [sum(parts, ()) for parts in product(*(list(compositions(d, n + 1))
                                                  for d, n in zip(multidegree, model.dims)))]
    picked = {}
    while len(picked) < min(n_terms, len(pool)):
        picked.setdefault(pool[rng.randint(0, len(pool) - 1)], rng.randint(-box, box))
    return SparsePolynomial(model.x_vars(), picked)


def _torus_point(rng: Xoshiro256, model: MultiplicativeGroupModel) -> tuple:
    return tuple(mpq(rng.choice((-3, -2, -1, 1, 2, 3)), rng.randint(1, 2)) for _ in model.x_vars())


def _gen_multiform(rng: Xoshiro256, caps: Caps) -> MultiformInstance:
    """A multiform vanishing at a sampled torus point: one linear constraint on one coefficient."""
    model = _random_model(rng, caps)

    def make():
        multidegree = tuple(rng.randint(1, min(caps.d, 3)) for _ in model.dims)
        P = _random_multiform(rng, model, multidegree, caps.box, rng.randint(2, 6))
        if len(P.terms) < 2:
            return None
        x = _torus_point(rng, model)
        e0 = max(P.terms)
        monomial = SparsePolynomial(model.x_vars(), {e0: 1})
        P = P - monomial.scale(P.evaluate(x) / monomial.evaluate(x))
        if P.is_zero():
            return None
        return MultiformInstance(MultiForm(model, P, multidegree), x)

    return _draw(rng, make, "multiform")


def _gen_staircase(rng: Xoshiro256, caps: Caps) -> SimplexStaircase:
    p = rng.randint(1, 2)
    blocks = tuple(rng.randint(1, min(caps.n, 2 if p == 1 else 1)) for _ in range(p))
    delta = tuple(rng.randint(1, min(caps.d, 4)) for _ in range(p))
    den = rng.randint(1, 4)
    return SimplexStaircase(delta, mpq(rng.randint(1, den), den), blocks)


def _gen_segre(rng: Xoshiro256, caps: Caps) -> MultiForm:
    model = _random_model(rng, caps, max_dim=3)
    multidegree = tuple(rng.randint(1, min(caps.d, 3)) for _ in model.dims)

    def make():
        P = _random_multiform(rng, model, multidegree, caps.box, rng.randint(1, 8))
        return None if P.is_zero() else MultiForm(model, P, multidegree)

    return _draw(rng, make, "segre form")


def _gen_corollary(rng: Xoshiro256, caps: Caps) -> CorollaryInstance:
    """Scalars meeting both hypotheses: delta_i >= n_i + 1 and delta_i / delta_{i+1} > (p/eps)^n."""
    dims = _random_model(rng, caps, max_blocks=3).dims
    p, n = len(dims), sum(dims)
    den = rng.randint(1, 3)
    eps = mpq(rng.randint(1, den), den)
    ratio = (mpq(p) / eps) ** n
    deltas = [dims[-1] + 1 + rng.randint(0, 3)]
    for nl in reversed(dims[:-1]):
        low = max(nl + 1, int(math.floor(ratio * deltas[0])) + 1)
        deltas.insert(0, low + rng.randint(0, 3))
    return CorollaryInstance(dims, tuple(deltas), eps, rng.randint(0, n - 1), mpq(rng.randint(0, 40), rng.randint(1, 4)))


_GENERATORS = {
    "implicit": _gen_implicit,
    "polynomial": _gen_polynomial,
    "chart": _gen_chart,
    "multiform": _gen_multiform,
    "staircase": _gen_staircase,
    "segre": _gen_segre,
    "corollary": _gen_corollary,
    "psi": lambda rng, caps: rng.randint(0, 10**4),
}


def generate_instance(kind: str, seed: int, caps: Caps | None = None) -> Instance:
    """Deterministic in (kind, seed, caps)."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown instance kind {kind!r}; choose from {list(KINDS)}")
    caps = caps or Caps()
    rng = Xoshiro256(seed)
    return Instance(kind, seed, caps, _GENERATORS[kind](rng, caps))


# ---------------------------------------------------------------- verifiers


def _verify_1_1(P: SparsePolynomial, cfg: CampaignConfig, seed: int) -> list[Certification]:
    kw = {"points_per_dim": cfg.quadrature_points, "seed": seed & 0xFFFFFFFF, "samples": cfg.unitary_samples}
    out = [check_comparison(P, "eq_1_7", **kw), check_comparison(P, "eq_1_19", **kw)]
    if P.nvars >= 2 and P.is_homogeneous():
        out += [check_comparison(P, "eq_1_20", **kw), check_comparison(P, "eq_1_21", **kw)]
    return out


def _verify_2_1(problem: ImplicitProblem, cfg: CampaignConfig, seed: int) -> list[Certification]:
    oracle = Certification("series-vs-recursion")
    series = solve_series(problem, cfg.order, symbolic=False).taylor
    recursion = recursion_taylor(problem, cfg.order)
    for I in indices_up_to(problem.n, cfg.order):
        if series.get(I, 0) != recursion.get(I, 0):
            oracle.add(check_true(f"a_{list(I)}", False, series=series.get(I, 0), recursion=recursion.get(I, 0)))
    oracle.add(check_true("all coefficients agree", not oracle.checks))
    return [oracle, verify_lemma_2_1(problem, cfg.order)]


def _verify_2_3(problem: ImplicitProblem, cfg: CampaignConfig, seed: int) -> list[Certification]:
    return [verify_denominator_bounds(solve_series(problem, cfg.order), partial_sums=2)]


def _verify_2_5(problem: ImplicitProblem, cfg: CampaignConfig, seed: int) -> list[Certification]:
    return [verify_lemma_2_5_bounds(problem, cfg.order, cfg.place_list())]


def _verify_3_1(chart: ParametrizedGroupChart, cfg: CampaignConfig, seed: int) -> list[Certification]:
    return [verify_lemma_3_1_bounds(chart, cfg.order, cfg.place_list())]


def _chart_data(chart: ParametrizedGroupChart, cfg: CampaignConfig):
    table = parametrize_group_chart(chart, cfg.order)
    return table, Hypothesis125.for_chart(chart)


def _verify_4_8(chart: ParametrizedGroupChart, cfg: CampaignConfig, seed: int) -> list[Certification]:
    table, data = _chart_data(chart, cfg)
    rng = Xoshiro256(seed)
    k = rng.randint(1, 3)
    m = [rng.randint(0, cfg.order)]
    places = cfg.place_list()
    return [verify_hypothesis_1_25(table, data, cfg.order, places), verify_prop_4_8(table, data, k, m, places)]


def _verify_4_15(chart: ParametrizedGroupChart, cfg: CampaignConfig, seed: int) -> list[Certification]:
    table, data = _chart_data(chart, cfg)
    rng = Xoshiro256(seed)
    k = rng.randint(1, 3)
    m = [rng.randint(0, min(cfg.order, 3))]
    return [verify_cor_4_15(table, data, k, m, cfg.place_list())]


def _verify_4_16(inst: MultiformInstance, cfg: CampaignConfig, seed: int) -> list[Certification]:
    rng = Xoshiro256(seed)
    m = [rng.randint(1, 2) for _ in inst.form.model.dims]
    return [verify_prop_4_16(inst.form.model, inst.form, m)]


def _verify_delta(inst: MultiformInstance, cfg: CampaignConfig, seed: int) -> list[Certification]:
    model, P = inst.form.model, inst.form.P
    rng = Xoshiro256(seed)
    other = _random_multiform(rng, model, inst.form.multidegree, 5, 3)
    cert = Certification("delta-suite")
    for I in indices_up_to(model.g, 2):
        closed, subst = delta_operator(model, P, I), delta_by_substitution(model, P, I)
        cert.add(check_true(f"closed form = substitution at {list(I)}", closed == subst))
    identities = verify_delta_identities(model, P, other, tuple(rng.randint(0, 2) for _ in range(model.g)))
    for I in indices_up_to(model.g, 2):
        for J in indices_up_to(model.g, 4 - sum(I)):
            res = delta_composition_membership(model, P, I, J)
            cert.add(check_true(f"Delta^{list(I)} Delta^{list(J)} P in the span", res.verified
                                and res.constants == membership_constants_closed(I, J)))
    origin = Staircase.origin(model.dims)
    vanishing = vanishing_multiplicity_check(model, P, inst.point, origin)
    cert.add(check_true("forced vanishing at the sampled point", vanishing.vanishes and vanishing.oracle_agrees))
    W1 = Staircase.closure(model.dims, [tuple(1 if j == k else 0 for j in range(model.g)) for k in range(model.g)])
    cert.add(check_true("translated Taylor oracle agrees on a first-order staircase",
                        vanishing_multiplicity_check(model, P, inst.point, W1).oracle_agrees))
    return [cert, identities]


def _verify_staircase(W: SimplexStaircase, cfg: CampaignConfig, seed: int) -> list[Certification]:
    cert = Certification("staircase-suite", info={"staircase": W.to_json()})
    report = sum_identity_report(W)
    cert.add(check_true("W_0 + ... + W_g inside W(delta, g eps)", report.sum_in_target))
    cert.info["reverse_inclusion"] = report.target_in_sum
    cert.info["reverse_counterexamples"] = [list(I) for I in report.target_minus_sum[:20]]
    rng = Xoshiro256(seed)
    den = rng.randint(1, 4)
    other = SimplexStaircase(W.delta, mpq(rng.randint(1, den), den), W.blocks)
    lhs = minkowski_sum(W.enumerate(), other.enumerate())
    rhs = SimplexStaircase(W.delta, W.epsilon + other.epsilon, W.blocks).enumerate()
    cert.add(check_true("W(eps1) + W(eps2) inside W(eps1 + eps2)", lhs.members <= rhs.members))
    f = functionals(W.enumerate())
    cert.add(check_true("H(W) <= sum t_l(W)", f.H <= sum(f.t)))
    axes = list(range(min(W.g, 3)))
    vol, _ = multiplicity_volume(W, axes)
    lattice = lattice_volume(W, axes)
    exact = float(vol)
    cert.add(check_le("|lattice - volume| <= 1% volume", abs(lattice - exact), 0.01 * exact))
    return [cert]


def _verify_psi(n: int, cfg: CampaignConfig, seed: int) -> list[Certification]:
    cert = Certification("psi", info={"n": n})
    value = psi(n)
    slack = numeric_slack(value)
    cert.add(check_le("psi(n) <= 1", value, 1, slack))
    if n >= 5:
        cert.add(check_le("psi(n) < 0", value, -slack, slack))
    if n >= 1:
        f = lemma_5_9_bound(n, n, 1, projective_space_height(n), 0)
        cert.add(check_le("|f(n, G_m^n, e) - (2n + 5)| <= rounding", abs(f - (2 * n + 5)), numeric_slack(f)))
    return [cert]


def _verify_segre(form: MultiForm, cfg: CampaignConfig, seed: int) -> list[Certification]:
    rng = Xoshiro256(seed)
    smap = SegreVeroneseMap(form.model, form.multidegree)
    points = [tuple(mpq(rng.randint(-9, 9), rng.randint(1, 5)) for _ in form.model.x_vars()) for _ in range(20)]
    return [verify_segre_roundtrip(smap, form, points)]


def _verify_corollary(inst: CorollaryInstance, cfg: CampaignConfig, seed: int) -> list[Certification]:
    values = inst.scalars()
    cert = Certification("corollary-bounds")
    cert.add(check_true("hypotheses of the corollary", all(corollary_hypotheses(values))))
    cert.add(check_true("ratio condition", all(condition_1_33(values))))
    cert.add(check_le("degree: general bound <= corollary", thm_5_19_degree_rhs(values), corollary_degree_rhs(values)))
    lhs, rhs = thm_5_19_height_rhs(values), corollary_height_rhs(values)
    cert.add(check_le("height: general bound <= corollary", lhs, rhs, numeric_slack(lhs, rhs)))
    return [cert]


_PLAN: dict[str, tuple[str, Callable]] = {
    "1.1": ("polynomial", _verify_1_1),
    "2.1": ("implicit", _verify_2_1),
    "2.3": ("implicit", _verify_2_3),
    "2.5": ("implicit", _verify_2_5),
    "3.1": ("chart", _verify_3_1),
    "4.8": ("chart", _verify_4_8),
    "4.15": ("chart", _verify_4_15),
    "4.16": ("multiform", _verify_4_16),
    "delta-identities": ("multiform", _verify_delta),
    "staircase-sum": ("staircase", _verify_staircase),
    "5.9-psi": ("psi", _verify_psi),
    "segre-roundtrip": ("segre", _verify_segre),
    "corollary-bounds": ("corollary", _verify_corollary),
}


# ---------------------------------------------------------------- campaign


def _margin_key(margin) -> float:
    try:
        return float(margin)
    except OverflowError:
        return math.inf if margin > 0 else -math.inf


def _tightest(certs: Iterable[Certification]):
    checks = [c for cert in certs for c in cert.checks if c.margin is not None]
    return min(checks, key=lambda c: _margin_key(c.margin), default=None)


def run_instance(config: CampaignConfig, lemma: str, index: int) -> dict:
    """One report record; module errors become records with verdict "error"."""
    set_precision(config.precision_bits)
    kind, verify = _PLAN[lemma]
    seed = instance_seed(config.seed, lemma, index)
    record: dict = {"lemma": lemma, "index": index, "kind": kind, "seed": seed}
    try:
        inst = generate_instance(kind, seed, config.caps)
        record["instance"] = inst.to_json()
        certs = verify(inst.data, config, seed)
    except Exception as exc:  # surfaced as a record, the campaign goes on
        record["verdict"] = "error"
        record["error"] = f"{type(exc).__name__}: {exc}"
        return record
    verdict = worst(c.verdict for c in certs)
    tight = _tightest(certs)
    record.update(
        verdict=verdict.value,
        lhs=to_jsonable(tight.lhs) if tight else None,
        rhs=to_jsonable(tight.rhs) if tight else None,
        margin=to_jsonable(tight.margin) if tight else None,
        checks={c.name: c.counts() for c in certs},
    )
    if verdict is not Verdict.HOLDS:
        record["offending"] = [ch.to_json() for c in certs for ch in c.checks if ch.verdict is not Verdict.HOLDS]
    return record


def _run_task(args):
    return run_instance(*args)


@dataclass
class CertificationReport:
    records: list[dict]
    config: CampaignConfig
    started: float = 0.0
    elapsed: float = 0.0

    def counts(self) -> dict[str, int]:
        out = {"holds": 0, "inconclusive": 0, "FAILED": 0, "error": 0}
        for r in self.records:
            out[r["verdict"]] += 1
        return out

    @property
    def exit_code(self) -> int:
        return 1 if self.counts()["FAILED"] else 0

    def summary(self) -> dict:
        counts = self.counts()
        return {
            "type": "summary",
            "tool_version": __version__,
            "config": self.config.to_json(),
            "records": len(self.records),
            "counts": counts,
            "warnings": counts["inconclusive"] + counts["error"],
            "exit_code": self.exit_code,
        }

    def envelope(self) -> dict:
        return {"type": "envelope", "started": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(self.started)),
                "elapsed_seconds": round(self.elapsed, 3)}

    def body_lines(self) -> list[str]:
        """Records then the summary; identical configs give identical lines."""
        lines = [json.dumps({"type": "record", **r}, sort_keys=True) for r in self.records]
        lines.append(json.dumps(self.summary(), sort_keys=True))
        return lines

    def to_jsonl(self) -> str:
        return "\n".join(self.body_lines() + [json.dumps(self.envelope(), sort_keys=True)]) + "\n"

    def to_json(self) -> dict:
        return {"records": self.records, "summary": self.summary(), "envelope": self.envelope()}


def run_campaign(config: CampaignConfig) -> CertificationReport:
    """Run every requested lemma on its seeded instances; records come back in index order."""
    started = time.time()
    tasks = [(config, lemma, j) for lemma in config.lemmas for j in range(config.count(lemma))]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        records = [_run_task(t) for t in tasks]
    set_precision(config.precision_bits)
    return CertificationReport(records, config, started, time.time() - started)

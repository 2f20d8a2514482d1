"""Command-line frontend; every command prints JSON.

Exit codes: 0 when nothing FAILED, 1 when some check FAILED, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .bounds import MissingScalar, bounds_to_json, evaluate_bounds
from .campaign import LEMMAS, CampaignConfig, Caps, run_campaign
from .certify import Verdict, worst
from .exact import Place, Q, format_rational, set_precision, to_jsonable
from .groups import (
    MultiplicativeGroupModel,
    SegreVeroneseMap,
    delta_operator,
    vanishing_multiplicity_check,
)
from .implicit import (
    ImplicitProblem,
    ParametrizedGroupChart,
    recursion_taylor,
    solve_series,
    taylor_coefficients,
    verify_denominator_bounds,
    verify_lemma_2_1,
    verify_lemma_2_5_bounds,
    verify_lemma_3_1_bounds,
)
from .measures import (
    DEFAULT_POINTS_PER_DIM,
    check_comparison,
    height_gauss_weil,
    height_mahler,
    height_unitary,
    measure_report,
)
from .poly import SparsePolynomial, indices_up_to, parse_polynomial
from .staircase import (
    SimplexStaircase,
    Staircase,
    functionals,
    lattice_volume,
    multiplicity_volume,
    sum_identity_report,
)


class UsageError(Exception):
    """Bad input; reported on stderr with exit code 2."""


# ---------------------------------------------------------------- input helpers


def _read_json(source: str) -> dict:
    """Inline JSON, a file path, or '-' for stdin."""
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith("{"):
        text = source
    else:
        path = Path(source)
        if not path.exists():
            raise UsageError(f"no such file: {source}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON: {exc}") from None


def _polynomial(args, variables: Sequence[str] | None = None) -> SparsePolynomial:
    if args.expr is not None:
        names = variables or _split(args.vars)
        if not names:
            raise UsageError("--expr needs --vars")
        return parse_polynomial(args.expr, names)
    if args.input is None:
        raise UsageError("give a polynomial as JSON (file, inline, or '-') or with --expr/--vars")
    P = SparsePolynomial.from_json(_read_json(args.input))
    if variables is not None and P.vars != tuple(variables):
        raise UsageError(f"expected the variables {list(variables)}, got {list(P.vars)}")
    return P


def _split(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _ints(text: str | None) -> list[int]:
    try:
        return [int(t) for t in _split(text)]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _places(args) -> list[Place] | None:
    if args.places is None:
        return None
    out = [Place(0)]
    for tok in _split(args.places):
        place = Place.parse(tok) if tok == "inf" or tok.startswith("p:") else Place.finite(int(tok))
        if place not in out:
            out.append(place)
    return out


def _add_poly_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", help="polynomial JSON: a path, inline JSON, or '-' for stdin")
    p.add_argument("--expr", help="polynomial as an expression, e.g. '3*X0^2 - X1/2'")
    p.add_argument("--vars", help="comma-separated variable names for --expr")


def _implicit_problem(args) -> ImplicitProblem:
    if args.point is not None:
        P = _polynomial(args)
        return ImplicitProblem(P, tuple(Q(c) for c in _split(args.point)), args.degree)
    if args.input is None:
        raise UsageError("give an implicit problem as JSON, or a polynomial with --point")
    return ImplicitProblem.from_json(_read_json(args.input))


def _verdict_code(verdict: Verdict) -> int:
    return 1 if verdict is Verdict.FAILED else 0


# ---------------------------------------------------------------- commands


def cmd_measure(args) -> tuple[object, int]:
    P = _polynomial(args)
    report = measure_report(P, method=args.method, points_per_dim=args.points, samples=args.samples,
                            seed=args.seed)
    return report.to_json(), 0


def cmd_height(args) -> tuple[object, int]:
    P = _polynomial(args)
    kw = {"points_per_dim": args.points, "samples": args.samples, "seed": args.seed}
    out: dict = {
        "gauss_weil": height_gauss_weil(P).to_json(),
        "mahler": height_mahler(P, method=args.method, **kw).to_json(),
    }
    is_form = P.nvars >= 2 and P.is_homogeneous()
    if is_form:
        out["unitary"] = height_unitary(P, seed=args.seed).to_json()
    code = 0
    if args.check:
        which = ["eq_1_19"] + (["eq_1_20", "eq_1_21"] if is_form else [])
        certs = [check_comparison(P, w, **kw) for w in which]
        out["comparisons"] = [c.to_json() for c in certs]
        code = _verdict_code(worst(c.verdict for c in certs))
    return out, code


def cmd_implicit_series(args) -> tuple[object, int]:
    problem = _implicit_problem(args)
    if args.method == "recursion":
        table = recursion_taylor(problem, args.order)
    else:
        table = taylor_coefficients(problem, args.order)
    rows = [{"I": list(I), "a": format_rational(table.get(I, 0))} for I in indices_up_to(problem.n, args.order)]
    return {"problem": problem.to_json(), "order": args.order, "method": args.method, "coefficients": rows}, 0


def cmd_verify_bounds(args) -> tuple[object, int]:
    places = _places(args)
    if args.lemma == "3.1":
        if args.input is None:
            raise UsageError("lemma 3.1 needs a chart JSON {g, N, forms, e}")
        chart = ParametrizedGroupChart.from_json(_read_json(args.input))
        cert = verify_lemma_3_1_bounds(chart, args.order, places)
        instance = chart.to_json()
    else:
        problem = _implicit_problem(args)
        instance = problem.to_json()
        if args.lemma == "2.1":
            cert = verify_lemma_2_1(problem, args.order)
        elif args.lemma == "2.3":
            cert = verify_denominator_bounds(solve_series(problem, args.order), args.partial_sums)
        else:
            cert = verify_lemma_2_5_bounds(problem, args.order, places)
    return {"lemma": args.lemma, "instance": instance, "certification": cert.to_json()}, _verdict_code(cert.verdict)


def cmd_staircase(args) -> tuple[object, int]:
    delta = [Q(x) for x in _split(args.delta)]
    if not delta:
        raise UsageError("--delta needs at least one weight")
    blocks = _ints(args.blocks) or [1] * len(delta)
    W = SimplexStaircase(tuple(delta), Q(args.epsilon), tuple(blocks))
    S = W.enumerate(cap=args.max_members)
    axes = list(range(min(W.g, 5)))
    vol, normalized = multiplicity_volume(W, axes)
    out: dict = {
        "staircase": W.to_json(),
        **S.to_json(),
        "functionals": functionals(S).to_json() if len(S) else None,
        "volume": {"axes": axes, "value": format_rational(vol), "times_k_factorial": format_rational(normalized),
                   "lattice_estimate": lattice_volume(W, axes)},
    }
    if args.sum_identity:
        out["sum_identity"] = sum_identity_report(W, args.copies).to_json()
    return out, 0


def _model(args) -> MultiplicativeGroupModel:
    dims = _ints(args.dims)
    if not dims:
        raise UsageError("--dims needs at least one block dimension")
    return MultiplicativeGroupModel(tuple(dims))


def cmd_delta_op(args) -> tuple[object, int]:
    model = _model(args)
    P = _polynomial(args, model.x_vars())
    if args.index is not None:
        indices = [tuple(_ints(args.index))]
    else:
        indices = list(indices_up_to(model.g, args.order))
    rows = []
    point = [Q(c) for c in _split(args.at)] if args.at else None
    for I in indices:
        D = delta_operator(model, P, I)
        row = {"I": list(I), "delta": D.to_json()}
        if point is not None:
            row["value"] = format_rational(D.evaluate(point))
        rows.append(row)
    out: dict = {"model": model.to_json(), "variables": list(model.x_vars()), "P": P.to_json(), "operators": rows}
    if point is not None:
        W = Staircase.closure(model.dims, indices)
        out["vanishing"] = vanishing_multiplicity_check(model, P, point, W).to_json()
    return out, 0


def cmd_segre(args) -> tuple[object, int]:
    model = _model(args)
    smap = SegreVeroneseMap(model, tuple(_ints(args.delta)))
    out = smap.to_json()
    out["variables"] = list(model.x_vars())
    out["expected_card"] = smap.expected_card()
    out["image_degree"] = smap.image_degree()
    if args.input is not None or args.expr is not None:
        P = _polynomial(args, model.x_vars())
        out["linear_form"] = smap.linear_form(P).to_json()
    if args.at:
        out["rho"] = [format_rational(c) for c in smap.embed_point([Q(c) for c in _split(args.at)])]
    return out, 0


# Scalar flags of the bound evaluators: (name, takes a comma-separated list).
SCALARS = [
    ("g", False), ("N", False), ("c", False), ("c_prime", False), ("delta", False), ("d", False),
    ("deg_G", False), ("h_G", False), ("h_P", False), ("h_A", False), ("h_e", False), ("s", False),
    ("k", False), ("H_W", False), ("eta", False), ("eps", False), ("dim_V", False), ("n", False),
    ("p", False), ("deg_A", False), ("E", True), ("m", True), ("t", True), ("n_blocks", True),
    ("g_blocks", True), ("delta_blocks", True), ("d_G", True), ("h_G_blocks", True), ("h_e_blocks", True),
    ("h_A_blocks", True),
]


def _scalar_value(text: str):
    text = text.strip()
    return float(text) if any(ch in text for ch in ".eE") else Q(text)


def cmd_bounds(args) -> tuple[object, int]:
    values: dict = {}
    if args.model:
        model = MultiplicativeGroupModel(tuple(_ints(args.model)))
        deltas = _ints(getattr(args, "delta_blocks")) if getattr(args, "delta_blocks") else None
        values.update(model.bound_scalars(delta_blocks=deltas))
    for name, is_list in SCALARS:
        raw = getattr(args, name)
        if raw is None:
            continue
        try:
            values[name] = [_scalar_value(x) for x in _split(raw)] if is_list else _scalar_value(raw)
        except ValueError:
            raise UsageError(f"--{name.replace('_', '-')}: not a number: {raw!r}") from None
    try:
        record = evaluate_bounds(args.theorem, values)
    except MissingScalar as exc:
        raise UsageError(f"{exc}; pass --{exc.name.replace('_', '-')} (or --model to fill group scalars)") from None
    return {"theorem": args.theorem, "scalars": to_jsonable(values), "bounds": bounds_to_json(record)}, 0


def cmd_campaign(args) -> tuple[object, int]:
    lemmas = tuple(_split(args.lemmas)) if args.lemmas is not None else LEMMAS
    caps = _ints(args.caps)
    if len(caps) != 3:
        raise UsageError("--caps needs n,d,box")
    places = None
    if args.places is not None:
        places = tuple(v.prime for v in _places(args) if not v.is_infinite)
    config = CampaignConfig(seed=args.seed, lemmas=lemmas, instances=args.instances, caps=Caps(*caps),
                            places=places, precision_bits=args.precision_bits, order=args.order,
                            quadrature_points=args.points, workers=args.workers)
    report = run_campaign(config)
    return report, report.exit_code


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for sampling (default 0)")
    common.add_argument("--precision-bits", type=int, default=128, help="working precision of logarithms")
    common.add_argument("--places", help="places to check: comma-separated primes or 'p:<prime>' (inf is implied)")
    common.add_argument("--out", help="write the output to this path instead of stdout")
    common.add_argument("--format", choices=("json", "jsonl"), default="json")

    parser = argparse.ArgumentParser(prog="zerolemma", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common], help="Gauss-Weil, Mahler, unitary measures and the L2 norm")
    _add_poly_input(p)
    p.add_argument("--method", default="auto", choices=("auto", "exact_univariate", "quadrature", "monte_carlo"))
    p.add_argument("--points", type=int, default=DEFAULT_POINTS_PER_DIM, help="quadrature points per dimension")
    p.add_argument("--samples", type=int, default=10**6, help="Monte-Carlo samples")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("height", parents=[common], help="heights of a polynomial, optionally with comparisons")
    _add_poly_input(p)
    p.add_argument("--method", default="auto", choices=("auto", "exact_univariate", "quadrature", "monte_carlo"))
    p.add_argument("--points", type=int, default=DEFAULT_POINTS_PER_DIM)
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--check", action="store_true", help="certify the comparisons between the heights")
    p.set_defaults(func=cmd_height)

    def implicit_inputs(p):
        _add_poly_input(p)
        p.add_argument("--point", help="base point (y_1, ..., y_n, t) when the input is a bare polynomial")
        p.add_argument("--degree", type=int, help="declared degree bound d")

    p = sub.add_parser("implicit-series", parents=[common], help="Taylor coefficients of the implicit function")
    implicit_inputs(p)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--method", choices=("series", "recursion"), default="series")
    p.set_defaults(func=cmd_implicit_series)

    p = sub.add_parser("verify-bounds", parents=[common], help="certify coefficient and denominator bounds")
    implicit_inputs(p)
    p.add_argument("--lemma", required=True, choices=("2.1", "2.3", "2.5", "3.1"))
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--partial-sums", type=int, help="cap on the partial-sum orders in the 2.3 check")
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("staircase", parents=[common], help="enumerate W(delta, eps)")
    p.add_argument("--delta", required=True, help="one weight per block, e.g. 3,2")
    p.add_argument("--epsilon", required=True, help="rational epsilon, e.g. 1/2")
    p.add_argument("--blocks", help="block sizes (default: all 1)")
    p.add_argument("--sum-identity", action="store_true", help="compare W_0 + ... + W_g with W(delta, g eps)")
    p.add_argument("--copies", type=int, help="number of summands (default g)")
    p.add_argument("--max-members", type=int, default=10**6)
    p.set_defaults(func=cmd_staircase)

    p = sub.add_parser("delta-op", parents=[common], help="Delta^I of a form on a product of G_m's")
    _add_poly_input(p)
    p.add_argument("--dims", required=True, help="block dimensions n_1,...,n_p")
    p.add_argument("--index", help="a single multi-index I")
    p.add_argument("--order", type=int, default=2, help="all I with |I| <= order (when --index is absent)")
    p.add_argument("--at", help="evaluate at this point and check vanishing on the staircase of the I's")
    p.set_defaults(func=cmd_delta_op)

    p = sub.add_parser("segre", parents=[common], help="Segre-Veronese map of a multidegree")
    _add_poly_input(p)
    p.add_argument("--dims", required=True)
    p.add_argument("--delta", required=True, help="multidegree delta_1,...,delta_p")
    p.add_argument("--at", help="embed this point")
    p.set_defaults(func=cmd_segre)

    p = sub.add_parser("bounds", parents=[common], help="evaluate degree and height bounds")
    p.add_argument("--theorem", required=True, choices=("4.8", "4.10", "4.13", "4.15", "4.16", "5.9", "5.17",
                                                        "5.19", "corollary"))
    p.add_argument("--model", help="fill group scalars from G_m^{n_1} x ... x G_m^{n_p}, e.g. 1,2")
    for name, is_list in SCALARS:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name,
                       help="comma-separated list" if is_list else None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("campaign", parents=[common], help="seeded verification campaign")
    p.add_argument("--lemmas", help=f"comma-separated subset of {','.join(LEMMAS)} (default all; '' for none)")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--caps", default="3,4,5", help="n,d,box")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--points", type=int, default=1024, help="quadrature points per dimension")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_campaign)
    return parser


def _render(result, fmt: str) -> str:
    if hasattr(result, "to_jsonl"):
        return result.to_jsonl() if fmt == "jsonl" else json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n"
    data = to_jsonable(result)
    if fmt == "jsonl":
        return json.dumps(data, sort_keys=True) + "\n"
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        set_precision(args.precision_bits)
        result, code = args.func(args)
    except (UsageError, ValueError, MissingScalar) as exc:
        print(f"zerolemma {args.command}: {exc}", file=sys.stderr)
        return 2
    text = _render(result, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

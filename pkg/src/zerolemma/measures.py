"""Measures of polynomials at every place of Q, the three heights built from
them, and certified checks of the comparison inequalities between them.

Gauss-Weil measures are exact rationals.  The Mahler measure is computed from
certified roots for one variable and by torus quadrature otherwise; the
unitary measure of a form is a Monte-Carlo sphere average plus its exact
degree correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from gmpy2 import mpq

from .certify import Certification, check_le, numeric_slack
from .exact import INF, LogValue, Place, Q, abs_v, log_rational, relevant_places
from .poly import SparsePolynomial, l2_norm_squared

DEFAULT_POINTS_PER_DIM = 4096
DEFAULT_MC_SAMPLES = 10**6
DEFAULT_UNITARY_SAMPLES = 200_000
ROOT_TOLERANCE = 1e-8


# ---------------------------------------------------------------- Gauss-Weil


def gauss_weil_measure_v(P: SparsePolynomial, v: Place) -> mpq:
    """max |c|_v over the coefficients of P."""
    if P.is_zero():
        raise ValueError("measure of the zero polynomial")
    return max(abs_v(c, v) for c in P.terms.values())


def gauss_weil_height_exp(P: SparsePolynomial) -> mpq:
    """prod_v M~_v(P), which equals max |c| of the primitive integer multiple."""
    if P.is_zero():
        raise ValueError("height of the zero polynomial")
    out = mpq(1)
    for v in relevant_places(P.terms.values()):
        out *= gauss_weil_measure_v(P, v)
    return out


def height_gauss_weil(P: SparsePolynomial) -> LogValue:
    h = log_rational(gauss_weil_height_exp(P))
    return LogValue(h, numeric_slack(h), "exact")


def _finite_part(P: SparsePolynomial) -> mpmath.mpf:
    # Sum over finite places of log M~_v = h~(P) - log max|c|.
    return log_rational(gauss_weil_height_exp(P) / gauss_weil_measure_v(P, INF))


# ---------------------------------------------------------------- roots


def _horner(coeffs, z):
    p = coeffs[0]
    dp = 0
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def polynomial_roots(coeffs: Sequence, max_iter: int = 1000):
    """Aberth-Ehrlich roots of a_0 z^n + ... + a_n (a_0 != 0, a_n != 0).

    Returns (roots, radii): the disks D(root_k, radius_k) contain all roots,
    and each connected union of m disks contains exactly m of them.
    """
    mp = mpmath.mp
    a = [mp.mpc(mp.mpf(int(Q(c).numerator)) / int(Q(c).denominator)) for c in coeffs]
    n = len(a) - 1
    if n < 1:
        return [], []
    a0 = a[0]
    mon = [c / a0 for c in a]
    r = max(abs(mon[i]) ** (mp.mpf(1) / i) for i in range(1, n + 1))
    z = [r * mp.expj(2 * mp.pi * k / n + mp.mpf("0.4")) for k in range(n)]
    tol = mp.ldexp(1, 20 - mp.prec)
    for _ in range(max_iter):
        biggest = mp.mpf(0)
        for k in range(n):
            p, dp = _horner(mon, z[k])
            if p == 0:
                continue
            ratio = p / dp if dp != 0 else mp.mpc(tol)
            s = mp.fsum(1 / (z[k] - z[j]) for j in range(n) if j != k)
            w = ratio / (1 - ratio * s)
            z[k] -= w
            biggest = max(biggest, abs(w) / max(1, abs(z[k])))
        if biggest < tol:
            break
    radii = []
    for k in range(n):
        p, _ = _horner(mon, z[k])
        den = mp.fprod(z[k] - z[j] for j in range(n) if j != k)
        radii.append(n * abs(p / den) if den != 0 else mp.inf)
    return z, radii


def _cluster_error(z, radii) -> mpmath.mpf:
    """Error bound for sum log max(1, |root|) from the inclusion disks."""
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= radii[i] + radii[j]:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    err = mpmath.mpf(0)
    for members in groups.values():
        # log max(1,|.|) is 1-Lipschitz; every root of the group lies within
        # the group's diameter of each center.
        diameter = 2 * mpmath.fsum(radii[i] for i in members)
        err += len(members) * diameter
    return err


def _univariate_coeffs(P: SparsePolynomial) -> list[mpq]:
    deg = int(P.total_degree)
    return [P.coefficient((k,)) for k in range(deg, -1, -1)]


def mahler_univariate(P: SparsePolynomial) -> LogValue:
    """log|a_0| + sum log max(1, |alpha_i|) from certified roots."""
    if P.nvars != 1:
        raise ValueError("exact Mahler measure needs a univariate polynomial")
    if P.is_zero():
        raise ValueError("measure of the zero polynomial")
    coeffs = _univariate_coeffs(P)
    while coeffs[-1] == 0:  # roots at 0 contribute nothing
        coeffs.pop()
    lead = log_rational(abs(coeffs[0]))
    if len(coeffs) == 1:
        return LogValue(lead, numeric_slack(lead), "exact")
    prec = mpmath.mp.prec
    try:
        for attempt in range(4):
            z, radii = polynomial_roots(coeffs)
            err = _cluster_error(z, radii)
            if err < ROOT_TOLERANCE:
                break
            mpmath.mp.prec *= 2
        total = lead + mpmath.fsum(mpmath.log(max(1, abs(r))) for r in z)
    finally:
        mpmath.mp.prec = prec
    if err >= ROOT_TOLERANCE:
        raise ArithmeticError(f"root refinement did not reach 1e-8 (bound {mpmath.nstr(err, 3)})")
    return LogValue(total, err + numeric_slack(total), "exact")


# ---------------------------------------------------------------- torus integrals


def torus_reduce(P: SparsePolynomial) -> SparsePolynomial:
    """A polynomial with the same Mahler measure and fewer variables.

    Drops variables that do not occur and, for a form in two or more
    variables, sets the first occurring variable to 1 (the torus is invariant
    under the scaling that makes this legitimate).
    """
    used = [i for i in range(P.nvars) if any(e[i] for e in P.terms)]
    if not used:
        return SparsePolynomial(("X",), {(0,): P.coefficient((0,) * P.nvars)})
    terms = {tuple(e[i] for i in used): c for e, c in P.terms.items()}
    R = SparsePolynomial(tuple(P.vars[i] for i in used), terms)
    if R.nvars >= 2 and R.is_homogeneous():
        R = SparsePolynomial(R.vars[1:], {e[1:]: c for e, c in R.terms.items()})
        return torus_reduce(R)
    # Dividing out the smallest power of each variable does not change |P| on the torus.
    low = [min(e[i] for e in R.terms) for i in range(R.nvars)]
    if any(low):
        R = SparsePolynomial(R.vars, {tuple(a - b for a, b in zip(e, low)): c for e, c in R.terms.items()})
        return torus_reduce(R)
    return R


def _monomial_mahler_exp(P: SparsePolynomial) -> mpq | None:
    """exp M-bar(P) as an exact rational when P is a monomial on the torus, else None."""
    R = torus_reduce(P)
    if R.total_degree != 0:
        return None
    return abs(R.coefficient((0,) * R.nvars))


def _grid_mean_log(P: SparsePolynomial, N: int, offset: float) -> float:
    """Midpoint-rule mean of log|P| on an N^n grid of the torus (n <= 2)."""
    n = P.nvars
    x = (np.arange(N) + 0.5 + offset) / N
    z = np.exp(2j * np.pi * x)
    if n == 1:
        vals = np.zeros(N, dtype=complex)
        for e, c in P.terms.items():
            vals += float(c) * z ** e[0]
        with np.errstate(divide="raise"):
            return float(np.mean(np.log(np.abs(vals))))
    # Horner in the second variable with first-variable coefficient rows.
    deg2 = max(e[1] for e in P.terms)
    rows = [np.zeros(N, dtype=complex) for _ in range(deg2 + 1)]
    for e, c in P.terms.items():
        rows[e[1]] += float(c) * z ** e[0]
    total = 0.0
    chunk = max(1, (1 << 21) // N)
    for start in range(0, N, chunk):
        w = z[start : start + chunk]
        acc = np.broadcast_to(rows[deg2][:, None], (N, len(w))).astype(complex)
        for b in range(deg2 - 1, -1, -1):
            acc = acc * w[None, :] + rows[b][:, None]
        with np.errstate(divide="raise"):
            total += float(np.sum(np.log(np.abs(acc))))
    return total / (N * N)


def mahler_quadrature(P: SparsePolynomial, points_per_dim: int = DEFAULT_POINTS_PER_DIM) -> LogValue:
    """Composite midpoint rule on the torus, error estimated by halving the grid.

    A node where P vanishes shifts the whole grid by a small offset; the
    number of retries is part of the method tag.
    """
    R = torus_reduce(P)
    if R.is_zero():
        raise ValueError("measure of the zero polynomial")
    if R.nvars > 2:
        raise ValueError("grid quadrature is limited to two torus dimensions; use Monte-Carlo")
    if R.total_degree == 0:
        c = next(iter(R.terms.values()))
        v = log_rational(abs(c))
        return LogValue(v, numeric_slack(v), "exact")
    retries = 0
    offset = 0.0
    while True:
        try:
            fine = _grid_mean_log(R, points_per_dim, offset)
            coarse = _grid_mean_log(R, points_per_dim // 2, offset)
            break
        except FloatingPointError:
            retries += 1
            offset = 0.5 * (math.sqrt(5) - 1) / (7 * retries)
            if retries > 5:
                raise ArithmeticError("quadrature keeps hitting zeros of P")
    err = abs(fine - coarse) + 1e-12 * (1 + abs(fine))
    tag = f"quadrature({points_per_dim})" + (f" retries={retries}" if retries else "")
    return LogValue(fine, err, tag)


def mahler_monte_carlo(P: SparsePolynomial, samples: int = DEFAULT_MC_SAMPLES, seed: int = 0) -> LogValue:
    """Monte-Carlo torus mean of log|P|; the error bar is three standard errors."""
    R = torus_reduce(P)
    rng = np.random.default_rng(seed)
    x = rng.random((samples, R.nvars))
    z = np.exp(2j * np.pi * x)
    vals = np.zeros(samples, dtype=complex)
    for e, c in R.terms.items():
        term = np.full(samples, float(c), dtype=complex)
        for i, k in enumerate(e):
            if k:
                term = term * z[:, i] ** k
        vals += term
    logs = np.log(np.abs(vals))
    std_err = float(np.std(logs) / math.sqrt(samples))
    return LogValue(float(np.mean(logs)), 3 * std_err, f"monte_carlo({samples}, std_err={std_err:.3g})")


def mahler_measure(P: SparsePolynomial, method: str = "auto", points_per_dim: int = DEFAULT_POINTS_PER_DIM,
                   samples: int = DEFAULT_MC_SAMPLES, seed: int = 0) -> LogValue:
    """log of the Mahler measure at the infinite place.

    ``method`` is ``exact_univariate``, ``quadrature``, ``monte_carlo`` or
    ``auto`` (roots when the torus reduction leaves one variable, the grid
    for two, Monte-Carlo beyond).
    """
    if P.is_zero():
        raise ValueError("measure of the zero polynomial")
    R = torus_reduce(P)
    if method == "auto":
        method = "exact_univariate" if R.nvars == 1 else ("quadrature" if R.nvars == 2 else "monte_carlo")
    if method == "exact_univariate":
        return mahler_univariate(R)
    if method == "quadrature":
        return mahler_quadrature(R, points_per_dim)
    if method == "monte_carlo":
        return mahler_monte_carlo(R, samples, seed)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------- unitary measure


def stokes_constant(degree: int, n: int) -> mpq:
    """degree * sum_{j=1}^{n} 1/(2j)."""
    return degree * sum((mpq(1, 2 * j) for j in range(1, n + 1)), mpq(0))


def unitary_measure(P: SparsePolynomial, samples: int = DEFAULT_UNITARY_SAMPLES, seed: int = 0,
                    blocks: Sequence[Sequence[int]] | None = None) -> LogValue:
    """Sphere average of log|P| plus the exact degree correction, per block.

    Points are uniform on the unit sphere of each block (normalized complex
    Gaussians).  The error bar is three standard errors.
    """
    if P.is_zero():
        raise ValueError("measure of the zero polynomial")
    if samples < 1000:
        raise ValueError("at least 10^3 samples are required")
    blocks = [list(b) for b in (blocks or [range(P.nvars)])]
    if not P.is_homogeneous(blocks):
        raise ValueError("unitary measure needs a (multi)homogeneous polynomial")
    if len(P.terms) == 1:
        # E log|z_i| = -H_n / 2 on each sphere, which the degree correction cancels.
        v = log_rational(abs(next(iter(P.terms.values()))))
        return LogValue(v, numeric_slack(v), "exact")
    rng = np.random.default_rng(seed)
    z = np.empty((samples, P.nvars), dtype=complex)
    for b in blocks:
        g = rng.standard_normal((samples, len(b))) + 1j * rng.standard_normal((samples, len(b)))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        z[:, b] = g
    vals = np.zeros(samples, dtype=complex)
    for e, c in P.terms.items():
        term = np.full(samples, float(c), dtype=complex)
        for i, k in enumerate(e):
            if k:
                term = term * z[:, i] ** k
        vals += term
    logs = np.log(np.abs(vals))
    std_err = float(np.std(logs) / math.sqrt(samples))
    correction = mpq(0)
    e0 = next(iter(P.terms))
    for b in blocks:
        deg = sum(e0[i] for i in b)
        correction += stokes_constant(deg, len(b) - 1)
    value = mpmath.mpf(float(np.mean(logs))) + mpmath.mpf(int(correction.numerator)) / int(correction.denominator)
    return LogValue(value, 3 * std_err, f"monte_carlo({samples}, std_err={std_err:.3g})")


# ---------------------------------------------------------------- heights


def height_mahler(P: SparsePolynomial, **kwargs) -> LogValue:
    """h-bar: finite places exactly, the infinite place by ``mahler_measure``."""
    return mahler_measure(P, **kwargs) + _finite_part(P)


def height_unitary(P: SparsePolynomial, **kwargs) -> LogValue:
    return unitary_measure(P, **kwargs) + _finite_part(P)


def l2_norm(P: SparsePolynomial) -> LogValue:
    """log ||P||_2 (the norm itself is sqrt of an exact rational)."""
    v = log_rational(l2_norm_squared(P)) / 2
    return LogValue(v, numeric_slack(v), "exact")


@dataclass
class MeasureReport:
    gauss_weil: LogValue
    mahler: LogValue
    unitary: LogValue | None
    l2_norm: LogValue

    def to_json(self) -> dict:
        return {
            "gauss_weil": self.gauss_weil.to_json(),
            "mahler": self.mahler.to_json(),
            "unitary": self.unitary.to_json() if self.unitary else None,
            "l2_norm": self.l2_norm.to_json(),
        }


def measure_report(P: SparsePolynomial, **kwargs) -> MeasureReport:
    gw = log_rational(gauss_weil_measure_v(P, INF))
    mahler_kwargs = {k: v for k, v in kwargs.items() if k in ("method", "points_per_dim", "samples", "seed")}
    unitary = None
    if P.is_homogeneous() and P.nvars >= 2:
        unitary = unitary_measure(P, seed=kwargs.get("seed", 0))
    return MeasureReport(LogValue(gw, numeric_slack(gw)), mahler_measure(P, **mahler_kwargs), unitary, l2_norm(P))


# ---------------------------------------------------------------- comparisons


def comparison_dimension(P: SparsePolynomial) -> int:
    """n in the comparison inequalities: forms in X_0..X_n count n, others their arity."""
    if P.nvars >= 2 and P.is_homogeneous():
        return P.nvars - 1
    return P.nvars


def _log_int(k: int) -> mpmath.mpf:
    return mpmath.log(k)


def check_comparison(P: SparsePolynomial, which: str, mahler: LogValue | None = None,
                     unitary: LogValue | None = None, **kwargs) -> Certification:
    """Certify one comparison between measures or heights.

    ``which`` is one of eq_1_7 (measures at the infinite place, plus the
    Euclidean-norm chain), eq_1_19, eq_1_20, eq_1_21 (heights).
    """
    if P.is_zero():
        raise ValueError("comparison for the zero polynomial")
    n = comparison_dimension(P)
    d = max(int(P.total_degree), 0)
    log_binom = _log_int(math.comb(d + n, n))
    cert = Certification(which, info={"n": n, "d": d})
    exact_mbar = _monomial_mahler_exp(P) if mahler is None else None
    if exact_mbar is not None and (which in ("eq_1_7", "eq_1_19") or (unitary is None and len(P.terms) == 1)):
        _exact_comparison(P, which, exact_mbar, n, d, cert)
        return cert
    if which == "eq_1_7":
        Mbar = mahler if mahler is not None else mahler_measure(P, **_mk(kwargs))
        Mt = gauss_weil_measure_v(P, INF)
        logMt = LogValue(log_rational(Mt))
        slack = numeric_slack(Mbar.value, logMt.value, log_binom)
        cert.add(check_le("binom^-1/2 Mbar <= M~", Mbar - log_binom / 2, logMt, slack))
        cert.add(check_le("M~ <= 2^(nd) Mbar", logMt, Mbar + n * d * mpmath.log(2), slack))
        cert.add(check_le("Mbar <= ||P||_2", Mbar, l2_norm(P), slack))
        cert.add(check_le("||P||_2^2 <= binom M~^2", l2_norm_squared(P), math.comb(d + n, n) * Mt**2))
        cert.info["mahler_method"] = Mbar.method
        return cert
    if which not in ("eq_1_19", "eq_1_20", "eq_1_21"):
        raise ValueError(f"unknown comparison {which!r}")
    ht = height_gauss_weil(P)
    fin = _finite_part(P)
    if which in ("eq_1_19", "eq_1_20"):
        hbar = (mahler if mahler is not None else mahler_measure(P, **_mk(kwargs))) + fin
    if which in ("eq_1_20", "eq_1_21"):
        if not (P.nvars >= 2 and P.is_homogeneous()):
            raise ValueError(f"{which} needs a form in at least two variables")
        hu = (unitary if unitary is not None else unitary_measure(P, **_uk(kwargs))) + fin
        stokes = stokes_constant(d, n)
        stokes_f = mpmath.mpf(int(stokes.numerator)) / int(stokes.denominator)
    if which == "eq_1_19":
        slack = numeric_slack(hbar.value, ht.value, log_binom)
        cert.add(check_le("hbar - log(binom)/2 <= h~", hbar - log_binom / 2, ht, slack))
        cert.add(check_le("h~ <= hbar + nd log 2", ht, hbar + n * d * mpmath.log(2), slack))
    elif which == "eq_1_20":
        slack = numeric_slack(hbar.value, hu.value)
        cert.add(check_le("hbar <= h", hbar, hu, slack))
        cert.add(check_le("h <= hbar + d sum 1/(2j)", hu, hbar + stokes_f, slack))
    else:
        slack = numeric_slack(hu.value, ht.value, log_binom)
        cert.add(check_le("h - log(binom)/2 - d sum 1/(2j) <= h~", hu - log_binom / 2 - stokes_f, ht, slack))
        cert.add(check_le("h~ <= h + nd log 2", ht, hu + n * d * mpmath.log(2), slack))
    return cert


def _exact_comparison(P: SparsePolynomial, which: str, mbar: mpq, n: int, d: int, cert: Certification) -> None:
    """Monomials on the torus: every side is the log of a rational, so compare squares exactly."""
    binom = math.comb(d + n, n)
    two = mpq(2) ** (n * d)
    cert.info["mahler_method"] = "exact"
    if which == "eq_1_7":
        Mt = gauss_weil_measure_v(P, INF)
        cert.add(check_le("binom^-1/2 Mbar <= M~ (squared)", mbar**2, binom * Mt**2))
        cert.add(check_le("M~ <= 2^(nd) Mbar", Mt, two * mbar))
        cert.add(check_le("Mbar^2 <= ||P||_2^2", mbar**2, l2_norm_squared(P)))
        cert.add(check_le("||P||_2^2 <= binom M~^2", l2_norm_squared(P), binom * Mt**2))
        return
    ht = gauss_weil_height_exp(P)
    hbar = mbar * ht / gauss_weil_measure_v(P, INF)
    if which == "eq_1_19":
        cert.add(check_le("exp(hbar)^2 <= binom exp(h~)^2", hbar**2, binom * ht**2))
        cert.add(check_le("exp(h~) <= 2^(nd) exp(hbar)", ht, two * hbar))
        return
    # A monomial has h = hbar = h~, so each side reduces to a rational constant.
    stokes = stokes_constant(d, n)
    if which == "eq_1_20":
        cert.add(check_le("exp(hbar) <= exp(h)", hbar, ht))
        cert.add(check_le("h - hbar <= d sum 1/(2j)", mpq(0), stokes))
    else:
        # binom >= 1, so 0 <= stokes already gives h - log(binom)/2 - stokes <= h~.
        cert.add(check_le("h - h~ <= d sum 1/(2j)", mpq(0), stokes))
        cert.add(check_le("exp(h~) <= 2^(nd) exp(h)", ht, two * ht))


def _mk(kwargs):
    return {k: v for k, v in kwargs.items() if k in ("method", "points_per_dim", "samples", "seed")}


def _uk(kwargs):
    return {k: v for k, v in kwargs.items() if k in ("samples", "seed", "blocks")}

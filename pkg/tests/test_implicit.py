import json
import math

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from zerolemma.campaign import Caps, generate_instance
from zerolemma.exact import INF
from zerolemma.implicit import (
    CofactorTable,
    ImplicitProblem,
    ParametrizedGroupChart,
    lemma_5_9_bound,
    newton_taylor_numeric,
    normalize_unit_coefficient,
    parametrize_group_chart,
    projective_space_height,
    psi,
    psi_sweep,
    recursion_taylor,
    solve_series,
    symbolic_identity_residual,
    taylor_coefficients,
    verify_denominator_bounds,
    verify_lemma_2_1,
    verify_lemma_2_5_bounds,
    verify_lemma_3_1_bounds,
)
from zerolemma.poly import parse_polynomial

SQRT = ImplicitProblem(parse_polynomial("T^2 - Y", ("Y", "T")), (1, 1))


def conic():
    F = parse_polynomial("X2*X0 - X1^2", ("X0", "X1", "X2"))
    return ParametrizedGroupChart(1, 2, {2: F}, (1, 0, 0))


def test_square_root_coefficients():
    a = taylor_coefficients(SQRT, 3)
    assert [a[(k,)] for k in range(4)] == [1, mpq(1, 2), mpq(-1, 8), mpq(1, 16)]
    assert recursion_taylor(SQRT, 3) == {I: c for I, c in a.items()}
    numeric = newton_taylor_numeric(SQRT, 3)
    assert all(abs(numeric[I] - mpmath.mpf(int(c.numerator)) / int(c.denominator)) < 1e-30 for I, c in a.items())


def test_square_root_symbolic_slices():
    sol = solve_series(SQRT, 4)
    V1 = sol.slices()[1].coefficient((1,))
    assert V1.k == 1
    assert V1.num == parse_polynomial("1", ("Y", "T"))
    assert symbolic_identity_residual(sol).is_zero()
    assert verify_denominator_bounds(sol).holds


def test_cofactors_of_the_square_root():
    table = CofactorTable(SQRT)
    assert table.get((1,)) == parse_polynomial("1", ("Y", "T"))
    assert table.coefficient((2,)) == mpq(-1, 8)
    assert verify_lemma_2_1(SQRT, 5, table).holds


def test_linear_in_t_terminates():
    P = parse_polynomial("T - Y^2", ("Y", "T"))
    sol = solve_series(ImplicitProblem(P, (3, 9)), 4)
    slices = sol.slices()
    assert all(slices[m].is_zero() for m in range(3, 5))
    assert all(c.k <= 1 for m in (1, 2) for c in slices[m].terms.values())
    assert sol.taylor[(1,)] == 6 and sol.taylor[(2,)] == 1


def test_local_bounds_examples():
    cert = verify_lemma_2_5_bounds(SQRT, 0, [INF])
    assert cert.holds
    cert = verify_lemma_2_5_bounds(SQRT, 1)
    assert cert.holds
    height = cert.checks[-1]
    assert abs(height.lhs.value - mpmath.log(2)) < 1e-30
    assert abs(height.rhs.value - 13 * (math.log(2) + 1)) < 1e-12


def test_problem_validation():
    P = parse_polynomial("T^2 - Y", ("Y", "T"))
    with pytest.raises(ValueError):
        ImplicitProblem(P, (1, 2))
    with pytest.raises(ValueError):
        ImplicitProblem(P, (0, 0))
    with pytest.raises(ValueError):
        ImplicitProblem(P, (1, 1), 1)
    assert ImplicitProblem.from_json(json.loads(json.dumps(SQRT.to_json()))) == SQRT


def test_normalization_picks_the_leading_coefficient():
    P, scale = normalize_unit_coefficient(parse_polynomial("4*T^2 - 2*Y", ("Y", "T")))
    assert scale == 4 and P == parse_polynomial("T^2 - Y/2", ("Y", "T"))


def test_conic_chart():
    chart = conic()
    table = parametrize_group_chart(chart, 4)
    assert table[0] == {(k,): int(k == 0) for k in range(5)}
    assert table[1] == {(k,): int(k == 1) for k in range(5)}
    assert table[2] == {(k,): int(k == 2) for k in range(5)}
    assert verify_lemma_3_1_bounds(chart, 4, table=table).holds


def test_chart_json_round_trip():
    chart = generate_instance("chart", 11).data
    again = ParametrizedGroupChart.from_json(json.loads(json.dumps(chart.to_json())))
    assert again.to_json() == chart.to_json()
    with pytest.raises(ValueError):
        ParametrizedGroupChart(1, 2, {}, (1, 0, 0))


def test_psi_and_f():
    assert lemma_5_9_bound(1, 1, 1, mpq(1, 2), 0) == 7
    assert abs(psi(0) - mpmath.log(2)) < 1e-30 and psi(0) <= 1
    assert psi(5) < 0
    assert projective_space_height(1) == mpq(1, 2)
    for n, h, value in psi_sweep(30):
        assert h == projective_space_height(n)
        assert abs(value - psi(n)) < 1e-30
    with pytest.raises(ValueError):
        lemma_5_9_bound(1, 2, 1, 0, 0)


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_recursion_equals_series(seed):
    problem = generate_instance("implicit", seed, Caps(2, 3, 5)).data
    table = CofactorTable(problem)
    series = taylor_coefficients(problem, 4)
    assert all(table.coefficient(I) == c for I, c in series.items())
    assert verify_lemma_2_1(problem, 4, table).holds
    assert verify_lemma_2_5_bounds(problem, 4, taylor=series).holds


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_chart_bounds_hold(seed):
    chart = generate_instance("chart", seed).data
    assert verify_lemma_3_1_bounds(chart, 3).holds

import math

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from zerolemma.campaign import generate_instance
from zerolemma.exact import INF
from zerolemma.groups import (
    Hypothesis125,
    MultiForm,
    MultiplicativeGroupModel,
    SegreVeroneseMap,
    coefficient_table_C,
    delta_by_substitution,
    delta_composition_membership,
    delta_operator,
    membership_constants,
    membership_constants_closed,
    segre_veronese,
    vanishing_multiplicity_check,
    verify_cor_4_15,
    verify_delta_identities,
    verify_hypothesis_1_25,
    verify_prop_4_8,
    verify_prop_4_16,
    verify_segre_roundtrip,
)
from zerolemma.implicit import parametrize_group_chart
from zerolemma.poly import SparsePolynomial, parse_polynomial
from zerolemma.staircase import Staircase

G1 = MultiplicativeGroupModel((1,))


def x(text, model=G1):
    return parse_polynomial(text, model.x_vars())


def y(text, model=G1):
    return parse_polynomial(text, model.y_vars())


def test_model_names_and_invariants():
    assert G1.x_vars() == ("X0", "X1") and G1.t_vars() == ("T1",)
    G = MultiplicativeGroupModel((1, 2))
    assert G.x_vars() == ("X1_0", "X1_1", "X2_0", "X2_1", "X2_2")
    assert G.g == 3 and G.p == 2
    scalars = G1.bound_scalars()
    assert scalars["N"] == 1 and scalars["h_G"] == mpq(1, 2) and scalars["d_G"] == [1]
    with pytest.raises(ValueError):
        MultiplicativeGroupModel((0,))


def test_delta_examples():
    P = x("X1^2 - 2*X0*X1 + X0^2")
    assert delta_operator(G1, P, (0,)) == y("(Y1 - Y0)^2")
    assert delta_operator(G1, P, (1,)) == y("2*Y1*(Y1 - Y0)")
    assert delta_operator(G1, P, (2,)) == y("Y1^2")
    assert delta_operator(G1, P, (3,)).is_zero()
    for I in range(4):
        assert delta_by_substitution(G1, P, (I,)) == delta_operator(G1, P, (I,))


def test_delta_identity_examples():
    X1 = x("X1")
    assert delta_operator(G1, X1 * X1, (1,)) == y("2*Y1^2")
    assert verify_delta_identities(G1, X1, X1, (1,)).holds
    one = SparsePolynomial.constant(G1.x_vars(), 1)
    assert verify_delta_identities(G1, x("X0^2 + 3*X1^2"), one, (2,)).holds


def test_vanishing_examples():
    P = x("(X1 - X0)^2")
    W01 = Staircase.closure((1,), [(1,)])
    W012 = Staircase.closure((1,), [(2,)])
    res = vanishing_multiplicity_check(G1, P, (1, 1), W01)
    assert res.vanishes and res.oracle_agrees
    res = vanishing_multiplicity_check(G1, P, (1, 1), W012)
    assert not res.vanishes and res.witnesses == [((2,), 1)] and res.oracle_agrees
    res = vanishing_multiplicity_check(G1, x("X1 - X0"), (1, 2), W01)
    assert res.witnesses[0] == ((0,), 1)
    assert vanishing_multiplicity_check(G1, P, (3, 5), Staircase((1,), frozenset())).vanishes
    with pytest.raises(ValueError):
        vanishing_multiplicity_check(G1, P, (0, 1), W01)


def test_membership_examples():
    assert membership_constants((1,), (1,)) == {(1,): 1, (2,): 2}
    assert membership_constants((0, 0), (1, 2)) == {(1, 2): 1}
    res = delta_composition_membership(G1, x("X0^3 + 2*X0*X1^2 - X1^3"), (1,), (1,))
    assert res.verified and res.constants == {(1,): 1, (2,): 2}


@given(st.lists(st.integers(0, 3), min_size=1, max_size=3), st.lists(st.integers(0, 3), min_size=3, max_size=3))
def test_membership_constants_closed_form(I, J):
    J = J[: len(I)]
    assert membership_constants(I, J) == membership_constants_closed(I, J)


def test_coefficient_table_example():
    smap = SegreVeroneseMap(G1, (1,))
    table = smap.chart_table(3)
    # Rows are in graded-lex order: Z0 = X0, Z1 = X1.
    assert coefficient_table_C(table, (0, 2), 3) == {(0,): 1, (1,): 2, (2,): 1}
    assert coefficient_table_C(table, (0, 0), 3) == {(0,): 1}
    with pytest.raises(ValueError):
        coefficient_table_C(table, (1,), 3)
    data = Hypothesis125.for_segre(smap, s=2)
    assert verify_cor_4_15(table, data, 2, [2]).holds


def test_chart_hypothesis_and_prop_4_8():
    chart = generate_instance("chart", 5).data
    table = parametrize_group_chart(chart, 3)
    data = Hypothesis125.for_chart(chart)
    assert verify_hypothesis_1_25(table, data, 3).holds
    assert verify_prop_4_8(table, data, 2, [2]).holds


def test_segre_examples():
    smap = SegreVeroneseMap(G1, (2,))
    assert smap.index_set == [(2, 0), (1, 1), (0, 2)] and smap.N == 2
    assert segre_veronese(smap, (2, 3)) == (4, 6, 9)
    assert segre_veronese(smap, (1, 1)) == (1, 1, 1)
    L = segre_veronese(smap, x("X1^2 - X0*X1"))
    assert L.terms == {(0, 0, 1): 1, (0, 1, 0): -1}
    points = [(mpq(a), mpq(b, 3)) for a, b in zip(range(1, 21), range(-10, 10))]
    assert verify_segre_roundtrip(smap, x("X1^2 - X0*X1"), points).holds
    with pytest.raises(ValueError):
        smap.linear_form(x("X1^3"))


def test_segre_on_a_product():
    G = MultiplicativeGroupModel((1, 2))
    smap = SegreVeroneseMap(G, (2, 1))
    assert smap.card == math.comb(3, 2) * math.comb(3, 1) == smap.expected_card()
    form = MultiForm(G, parse_polynomial("X1_0*X1_1*X2_2 - 3*X1_1^2*X2_0", G.x_vars()))
    assert form.multidegree == (2, 1)
    assert verify_segre_roundtrip(smap, form, [((1, 2), (3, -1, 5)), ((mpq(1, 2), 7), (1, 1, -2))]).holds
    with pytest.raises(ValueError):
        MultiForm(G, parse_polynomial("X1_0 + X2_0^2", G.x_vars()))


def test_prop_4_16_on_a_sample():
    form = generate_instance("multiform", 3).data.form
    assert verify_prop_4_16(form.model, form, [1] * form.model.p).holds


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_closed_form_equals_substitution(seed):
    form = generate_instance("multiform", seed).data.form
    for I in [(0,) * form.model.g, (1,) * form.model.g, tuple(range(form.model.g))]:
        assert delta_operator(form.model, form, I) == delta_by_substitution(form.model, form, I)


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_forced_vanishing_point(seed):
    inst = generate_instance("multiform", seed).data
    res = vanishing_multiplicity_check(inst.form.model, inst.form, inst.point, Staircase.origin(inst.form.model.dims))
    assert res.vanishes and res.oracle_agrees

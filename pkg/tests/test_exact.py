import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from zerolemma.exact import (
    INF,
    Place,
    Q,
    abs_v,
    factor_integer,
    format_rational,
    is_prime,
    product_formula_check,
    relevant_places,
    valuation,
)

rationals = st.fractions(max_denominator=10**6).filter(lambda f: abs(f.numerator) <= 10**9)
nonzero = rationals.filter(lambda f: f != 0)


def P(p):
    return Place.finite(p)


def test_abs_v_examples():
    assert abs_v(2, INF) == 2
    assert abs_v(6, P(2)) == mpq(1, 2)
    assert abs_v(mpq(3, 8), P(2)) == 8
    assert abs_v(0, P(3)) == 0


def test_relevant_places_examples():
    assert relevant_places([6, -4]) == [INF, P(2), P(3)]
    assert relevant_places([1]) == [INF]
    assert relevant_places([mpq(3, 8), 5]) == [INF, P(2), P(3), P(5)]


@pytest.mark.parametrize("x", [1, 6, mpq(-3, 8), mpq(10**12 + 39, 7**5)])
def test_product_formula_examples(x):
    assert product_formula_check(x).value == 0


def test_place_parsing_and_rejection():
    assert Place.parse("inf") == INF
    assert Place.parse("p:7") == P(7)
    assert str(P(7)) == "p:7"
    with pytest.raises(ValueError):
        Place.parse("7")
    with pytest.raises(ValueError):
        Place.finite(9)
    with pytest.raises(ValueError):
        product_formula_check(0)


def test_rational_parsing_and_format():
    assert Q("3/8") == mpq(3, 8)
    with pytest.raises(ValueError):
        Q("-0.25")
    assert format_rational(mpq(-6, 4)) == "-3/2"
    assert format_rational(5) == "5"


def test_factorization_and_primality():
    assert factor_integer(360) == ((2, 3), (3, 2), (5, 1))
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)
    assert valuation(mpq(40, 3), 2) == 3 and valuation(mpq(40, 3), 3) == -1


@given(nonzero)
def test_product_formula_is_exact(x):
    assert product_formula_check(x).value == 0


@given(nonzero)
def test_product_of_absolute_values_is_one(x):
    total = mpq(1)
    for v in relevant_places([x]):
        total *= abs_v(x, v)
    assert total == 1


@given(rationals, rationals, st.sampled_from([2, 3, 5, 7]))
def test_ultrametric_inequality(x, y, p):
    assert abs_v(Q(x) + Q(y), P(p)) <= max(abs_v(x, P(p)), abs_v(y, P(p)))


@given(rationals, rationals, st.sampled_from([INF, P(2), P(3), P(11)]))
def test_absolute_value_is_multiplicative(x, y, v):
    assert abs_v(Q(x) * Q(y), v) == abs_v(x, v) * abs_v(y, v)


@given(st.integers(min_value=1, max_value=10**8))
def test_factorization_reconstructs(n):
    prod = 1
    for p, e in factor_integer(n):
        assert is_prime(p)
        prod *= p**e
    assert prod == n

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from zerolemma.bounds import (
    MissingScalar,
    bounds_to_json,
    condition_1_33,
    corollary_degree_rhs,
    corollary_height_rhs,
    corollary_hypotheses,
    evaluate_bounds,
    f_N_G_e,
    thm_4_13_degree_rhs,
    thm_5_19_degree_rhs,
    thm_5_19_height_rhs,
)
from zerolemma.campaign import generate_instance
from zerolemma.groups import MultiplicativeGroupModel

COROLLARY = {"n": 1, "n_blocks": [1], "delta_blocks": [2], "eps": 1, "dim_V": 0, "h_P": 0}


def test_corollary_example():
    assert corollary_degree_rhs(COROLLARY) == 1
    assert abs(corollary_height_rhs(COROLLARY) - 108) < mpmath.mpf(10) ** -30
    assert corollary_hypotheses(COROLLARY) == [True]


def test_theorem_4_13_degree_example():
    assert thm_4_13_degree_rhs({"deg_G": 1, "c_prime": 1, "delta": 3, "g": 1, "d": 0}) == 3


def test_f_on_the_multiplicative_group():
    values = MultiplicativeGroupModel((1,)).bound_scalars()
    assert f_N_G_e(values) == 7
    assert evaluate_bounds("5.9", values)["f"].value == 7


def test_condition_straddles_the_threshold():
    base = {"c_prime": 1, "eps": mpq(1, 2), "d_G": [1, 1], "g": 3}
    assert condition_1_33({**base, "delta_blocks": [64, 1]}) == [False]
    assert condition_1_33({**base, "delta_blocks": [mpq(641, 10), 1]}) == [True]
    assert condition_1_33({**base, "d_G": [2, 1], "delta_blocks": [128, 1]}) == [False]
    assert condition_1_33({**base, "d_G": [2, 1], "delta_blocks": [129, 1]}) == [True]


def test_missing_scalar_is_named():
    with pytest.raises(MissingScalar) as info:
        corollary_height_rhs({k: v for k, v in COROLLARY.items() if k != "eps"})
    assert "eps" in str(info.value)
    with pytest.raises(ValueError):
        evaluate_bounds("9.99", COROLLARY)


def test_dispatch_and_json():
    record = evaluate_bounds("corollary", COROLLARY)
    data = bounds_to_json(record)
    assert data["degree"] == "1" and abs(data["height"]["value"] - 108) < 1e-9
    assert data["warnings"] == []
    assert "eps outside (0, 1]" in evaluate_bounds("corollary", {**COROLLARY, "eps": 2})["warnings"]


def test_model_auto_fill_covers_every_statement():
    model = MultiplicativeGroupModel((1, 1))
    values = model.bound_scalars([9, 2])
    # The height of the Segre-Veronese image is not auto-filled for several blocks.
    values.update(h_G=1, H_W=2, eps=1, dim_V=0, h_P=0, delta=2, d=0, m=[1, 1], k=1, t=[1, 1], eta=0)
    for theorem in ("4.8", "4.10", "4.13", "4.15", "4.16", "5.9", "5.17", "5.19", "corollary"):
        assert evaluate_bounds(theorem, values)


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_general_bound_below_the_corollary(seed):
    values = generate_instance("corollary", seed).data.scalars()
    assert all(corollary_hypotheses(values)) and all(condition_1_33(values))
    assert thm_5_19_degree_rhs(values) <= corollary_degree_rhs(values)
    lhs, rhs = thm_5_19_height_rhs(values), corollary_height_rhs(values)
    assert lhs <= rhs * (1 + mpmath.mpf(10) ** -30)

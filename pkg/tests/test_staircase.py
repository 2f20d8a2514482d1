from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from zerolemma.staircase import (
    SimplexStaircase,
    Staircase,
    functionals,
    lattice_volume,
    minkowski_sum,
    multiplicity_volume,
    sum_identity_report,
)

W32 = SimplexStaircase((3, 2), 1)


def test_enumeration_examples():
    assert W32.enumerate().members == {(0, 0), (1, 0), (2, 0), (0, 1), (1, 1)}
    assert W32.cardinality() == 5
    assert SimplexStaircase((4,), mpq(1, 2)).enumerate().members == {(0,), (1,)}
    assert SimplexStaircase((3, 2), mpq(1, 3)).enumerate().members == {(0, 0)}


def test_membership_is_strict():
    assert (1, 1) in W32 and (2, 1) not in W32
    assert (0, 2) not in W32  # 2/2 = 1 is not < 1


def test_minkowski_examples():
    A = Staircase.closure((1,), [(1,)])
    assert minkowski_sum(A, A).members == {(0,), (1,), (2,)}
    B = W32.enumerate()
    assert minkowski_sum(B, Staircase.origin((1, 1))) == B
    with pytest.raises(ValueError):
        minkowski_sum(A, B)


def test_w32_doubled_against_w32_at_two():
    report = sum_identity_report(W32, copies=2)
    assert report.sum_in_target
    # W + W tops out at (4,0), (3,1), (2,2); the target also has these four.
    assert report.target_minus_sum == [(0, 3), (1, 3), (4, 1), (5, 0)]


def test_functionals_examples():
    f = functionals(W32.enumerate())
    assert f.t == (2, 1) and f.H == 2
    assert functionals(Staircase.origin((2, 1))) == functionals(Staircase.origin((2, 1)))
    assert functionals(Staircase.origin((2, 1))).H == 0
    with pytest.raises(ValueError):
        functionals(Staircase((1,), frozenset()))


def test_lower_set_is_enforced():
    with pytest.raises(ValueError):
        Staircase((2,), frozenset({(0, 0), (1, 1)}))


def test_volume_examples():
    W = SimplexStaircase((2,), 1, (2,))
    vol, m = multiplicity_volume(W, [0, 1])
    assert vol == 2 and m == 4
    assert abs(lattice_volume(W, [0, 1]) - 2) <= 0.02
    assert multiplicity_volume(SimplexStaircase((5,), mpq(2, 3)), [0])[0] == mpq(10, 3)
    with pytest.raises(ValueError):
        multiplicity_volume(W, [])


def test_member_cap():
    with pytest.raises(OverflowError):
        SimplexStaircase((10**4, 10**4), 1).enumerate(cap=1000)


deltas = st.lists(st.integers(1, 5), min_size=1, max_size=3)
epsilons = st.builds(mpq, st.integers(1, 6), st.integers(1, 4))


@given(deltas, epsilons)
def test_enumeration_matches_brute_force(ds, eps):
    W = SimplexStaircase(tuple(ds), eps)
    box = [range(int(eps * d) + 1) for d in ds]
    import itertools

    brute = {I for I in itertools.product(*box) if sum(Fraction(a, d) for a, d in zip(I, ds)) < Fraction(int(eps.numerator), int(eps.denominator))}
    assert W.enumerate().members == brute


@given(deltas, epsilons)
def test_t_bounded_by_eps_delta(ds, eps):
    W = SimplexStaircase(tuple(ds), eps)
    f = functionals(W.enumerate())
    assert all(t <= eps * d for t, d in zip(f.t, ds))


@given(deltas, epsilons, epsilons)
def test_minkowski_subadditivity(ds, e1, e2):
    A = SimplexStaircase(tuple(ds), e1).enumerate()
    B = SimplexStaircase(tuple(ds), e2).enumerate()
    assert minkowski_sum(A, B).members <= SimplexStaircase(tuple(ds), e1 + e2).enumerate().members


@given(st.lists(st.integers(1, 4), min_size=1, max_size=3), st.builds(mpq, st.integers(1, 3), st.integers(1, 4)))
def test_sum_stays_inside_scaled_target(ds, eps):
    report = sum_identity_report(SimplexStaircase(tuple(ds), eps))
    assert report.sum_in_target


@given(deltas, epsilons)
def test_lattice_volume_within_one_percent(ds, eps):
    W = SimplexStaircase(tuple(ds), eps)
    axes = list(range(len(ds)))
    vol, _ = multiplicity_volume(W, axes)
    assert abs(lattice_volume(W, axes) - float(vol)) <= 0.01 * float(vol)

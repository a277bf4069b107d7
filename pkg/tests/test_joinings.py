from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.averages import l2_multicorrelation_defect, scalar_multicorrelation
from ergolab.errors import CostGuardError, DomainError
from ergolab.joinings import (
    JoiningEstimate,
    defect_bound,
    empirical_joining_3,
    empirical_joining_6,
    invariance_defect,
    product_splitting_defect,
    resonant_character_triple,
    within_bound,
)
from ergolab.measure_algebra import StepFunction, TrigPolynomial
from ergolab.systems import Identity, RankOneTower, Rotation, cat_map, chacon_stage

F = Fraction
chi = TrigPolynomial.character
cos = TrigPolynomial.cosine
ONE2 = TrigPolynomial.constant(1, 2)


def test_constants_give_one():
    assert empirical_joining_3(cat_map(), ONE2, ONE2, ONE2, 10).value == 1
    assert empirical_joining_6(cat_map(), *[ONE2] * 6, 10).value == 1


def test_constant_slots_factor_out():
    f = cos((1, 2), F(1, 2)) + TrigPolynomial.constant(F(1, 3), 2)
    g, h = TrigPolynomial.constant(2, 2), TrigPolynomial.constant(F(3, 4), 2)
    est = empirical_joining_3(cat_map(), f, g, h, 37)
    assert est.value == F(3, 2) * F(1, 3)
    assert est.invariance_defect_bound == F(2, 37) * F(5, 6) * 2 * F(3, 4)


def test_estimate_json():
    est = empirical_joining_3(Rotation(F(1, 3)), chi((1,)), chi((-2,)), chi((1,)), 6)
    data = est.to_json()
    assert data["order"] == 3 and data["N"] == 6 and data["pattern"] == "nu"
    assert data["value"] == [1, 1]
    with pytest.raises(DomainError):
        JoiningEstimate(4, 0, 1, F(0), "nu")


def test_marginal_collapse_is_exact():
    fs = [cos((1, 0)), chi((0, 1)), cos((1, 1))]
    for n in (1, 5, 40):
        eta = empirical_joining_6(cat_map(), *fs, ONE2, ONE2, ONE2, n).value
        assert eta == scalar_multicorrelation(cat_map(), [ONE2] + fs, [n]).last


def test_diagonal_equals_squared_l2_defect():
    fs = [cos((1, 0)), cos((0, 1)), cos((1, 1))]
    eta = empirical_joining_6(cat_map(), *fs, *fs, 256).value
    l2 = l2_multicorrelation_defect(cat_map(), fs, [256])
    assert eta == l2.squares[0]


def test_order6_cost_guard():
    with pytest.raises(CostGuardError):
        empirical_joining_6(cat_map(), *[ONE2] * 6, 2 ** 12 + 1)


def test_identity_system_has_no_defect():
    fs = [StepFunction.indicator(chacon_stage(1).level_set([k])) for k in range(3)]
    assert invariance_defect(Identity(), fs, 9, "nu") == 0
    assert invariance_defect(Identity(), fs + fs, 9, "eta") == 0


def test_cat_nu_defect_within_bound():
    fs = [chi(_hit()), chi((1, 0)), chi((0, 1))]
    n = 2 ** 12
    d = invariance_defect(cat_map(), fs, n, "nu")
    assert d == F(1, n)
    assert within_bound(d, defect_bound(fs, n))


def _hit():
    # a with a + B b + B^2 c = 0 for b = (1, 0), c = (0, 1) and B = [[1, -1], [-1, 2]]
    return (-(1 - 3), -(-1 + 5))


def test_pattern_validation():
    with pytest.raises(DomainError):
        invariance_defect(cat_map(), [ONE2] * 3, 4, "eta")
    with pytest.raises(DomainError):
        invariance_defect(cat_map(), [ONE2] * 3, 4, "mu")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=6, max_size=6),
       st.integers(2, 60), st.sampled_from(["J", "nu", "eta"]))
def test_telescoping_bound_cat(modes, n, pattern):
    fs = [cos(m) if m != (0, 0) else ONE2 for m in modes][: 6 if pattern == "eta" else 3]
    assert within_bound(invariance_defect(cat_map(), fs, n, pattern), defect_bound(fs, n))


@settings(max_examples=20, deadline=None)
@given(st.lists(st.lists(st.integers(0, 12), min_size=1, max_size=3), min_size=6, max_size=6),
       st.integers(2, 40), st.sampled_from(["nu", "eta"]))
def test_telescoping_bound_chacon(levels, n, pattern):
    st_ = chacon_stage(2, terminal=5)
    fs = [StepFunction.indicator(st_.level_set(ks)) for ks in levels][: 6 if pattern == "eta" else 3]
    d = invariance_defect(RankOneTower(5), fs, n, pattern)
    assert isinstance(d, Fraction)
    assert d <= defect_bound(fs, n)


def test_product_splitting():
    assert product_splitting_defect(cat_map(), ONE2, ONE2, ONE2, 10) == 0
    a, b, c = resonant_character_triple()
    assert (a, b, c) == (-1, 2, -1)
    rot = Rotation(F(89, 144))
    assert product_splitting_defect(rot, chi((a,)), chi((b,)), chi((c,)), 500) == 1
    assert product_splitting_defect(cat_map(), chi((1, 0)), chi((0, 1)), chi((1, 1)), 2 ** 10) == 0

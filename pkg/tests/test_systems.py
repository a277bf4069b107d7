from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.errors import CostGuardError, DomainError, HorizonError
from ergolab.measure_algebra import IntervalSet, StepFunction, TrigPolynomial, normalize
from ergolab.systems import (
    CyclicShift,
    Identity,
    Product,
    RankOneTower,
    Rotation,
    TorusAutomorphism,
    apply_set,
    cat_map,
    chacon_height,
    chacon_stage,
    character_orbit,
    golden_approximant,
    koopman_apply,
    system_from_json,
)

from conftest import interval_sets, rationals

F = Fraction


def test_chacon_heights():
    assert [chacon_height(n) for n in range(4)] == [1, 4, 13, 40]
    assert chacon_height(12) == 797161
    assert chacon_stage(12).height == 797161


@pytest.mark.parametrize("n", [0, 1, 3, 5])
def test_terminal_stage_tiles_unit_interval(n):
    st_ = chacon_stage(n)
    assert st_.union() == IntervalSet.full()
    assert st_.width == F(1, st_.height)


def test_earlier_stage_nests_in_terminal():
    coarse, fine = chacon_stage(2, terminal=4), chacon_stage(4)
    # every coarse level is a union of fine levels
    fine_levels = set(fine.levels)
    for lo, hi in coarse.levels:
        inside = [lv for lv in fine_levels if lo <= lv[0] and lv[1] <= hi]
        assert sum(b - a for a, b in inside) == hi - lo
    assert coarse.union().measure == F(13 * 9, chacon_height(4))


def test_tower_moves_each_level_up_one():
    tower = RankOneTower(4)
    st_ = tower.tower
    for k in range(st_.height - 1):
        assert apply_set(tower, st_.level_set([k]), 1) == st_.level_set([k + 1])
    assert apply_set(tower, st_.level_set([st_.height - 1]), 1) == st_.level_set([0])


def test_pointwise_translation_inside_levels():
    # on a level below the top, T is the translation carrying it onto the next level
    tower = RankOneTower(3)
    st_ = tower.tower
    for k in (0, 7, 20, 38):
        lo, hi = st_.level(k)
        nlo, _ = st_.level(k + 1)
        piece = normalize([(lo + (hi - lo) / 3, lo + (hi - lo) / 2)])
        assert apply_set(tower, piece, 1) == piece.translate(nlo - lo)


def test_horizon_policy():
    tower = RankOneTower(2)
    apply_set(tower, IntervalSet.interval(0, "1/2"), 11)
    with pytest.raises(HorizonError):
        apply_set(tower, IntervalSet.interval(0, "1/2"), 12)
    with pytest.raises(CostGuardError):
        RankOneTower(15)


def test_character_orbit_convention():
    assert character_orbit([[2, 1], [1, 1]], (1, 0), 2) == (2, -3)
    assert character_orbit([[2, 1], [1, 1]], (2, -3), -2) == (1, 0)


def test_rotation_koopman_conventions():
    r = Rotation(F(1, 4))
    chi = koopman_apply(r, TrigPolynomial.character((1,)), 1)
    assert chi.coeff((1,)).as_gaussian() == (0, -1)
    f = koopman_apply(r, StepFunction.indicator(IntervalSet.interval(0, "1/4")), 1)
    assert f.support() == IntervalSet.interval("1/4", "1/2")


def test_torus_requires_unimodular():
    with pytest.raises(DomainError):
        TorusAutomorphism(((2, 0), (0, 1)))


def test_product_transports_blockwise():
    p = Product(cat_map(), Rotation(F(1, 3)))
    assert p.torus_dim == 3
    mode, theta = p.transport_mode((1, 0, 2), 2)
    assert mode == (2, -3, 2)
    assert theta % 1 == F(-4, 3) % 1


def test_golden_approximant():
    g = golden_approximant()
    assert g.denominator >= 2 ** 128
    assert abs(float(g) - (5 ** 0.5 - 1) / 2) < 1e-30


@pytest.mark.parametrize("sys", [Identity(), CyclicShift(7), Rotation(F(2, 9)), cat_map(), RankOneTower(3),
                                 Product(cat_map(), Rotation(F(1, 5)))])
def test_system_json_round_trip(sys):
    assert system_from_json(sys.to_json()) == sys


systems = st.sampled_from([Identity(), CyclicShift(12), Rotation(F(5, 17)), Rotation(golden_approximant()),
                           RankOneTower(4)])


@settings(max_examples=150, deadline=None)
@given(systems, interval_sets(), st.integers(-38, 38))
def test_apply_set_preserves_measure_and_inverts(sys, a, i):
    b = apply_set(sys, a, i)
    assert b.measure == a.measure
    assert apply_set(sys, b, -i) == a


@settings(max_examples=50, deadline=None)
@given(interval_sets(), rationals, st.integers(-20, 20))
def test_koopman_apply_matches_apply_set(a, alpha, i):
    r = Rotation(alpha % 1)
    assert koopman_apply(r, StepFunction.indicator(a), i) == StepFunction.indicator(apply_set(r, a, i))

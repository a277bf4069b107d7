from fractions import Fraction

import numpy as np
import pytest

from ergolab.averages import (
    dyadic,
    l2_multicorrelation_defect,
    positivity_certificate,
    roth_average,
    scalar_multicorrelation,
)
from ergolab.errors import ClassMismatchError, DomainError, UnsupportedError
from ergolab.measure_algebra import IntervalSet, StepFunction, TrigPolynomial
from ergolab.systems import CyclicShift, Identity, RankOneTower, Rotation, apply_set, cat_map, chacon_stage, \
    golden_approximant, koopman_apply

F = Fraction
chi = TrigPolynomial.character


def test_identity_roth_average_is_measure():
    a = IntervalSet.interval("1/5", "3/7")
    series = roth_average(Identity(), a, [1, 5, 50])
    assert series.values == (a.measure,) * 3
    assert series.exact


def test_roth_average_matches_brute_force_on_rotation():
    sys, a = Rotation(F(3, 11)), IntervalSet.interval(0, "2/5")
    series = roth_average(sys, a, [3, 10, 25])
    for n, v in series:
        brute = sum((StepFunction.indicator(a) * StepFunction.indicator(apply_set(sys, a, i))
                     * StepFunction.indicator(apply_set(sys, a, 2 * i))).integral() for i in range(1, n + 1)) / n
        assert v == brute


def test_cell_route_matches_step_route():
    # same numbers from the compiled level-array route and the Fraction route
    tower = RankOneTower(5)
    st_ = chacon_stage(2, terminal=5)
    fs = [StepFunction.indicator(st_.level_set(ks)) for ks in ([0, 1], [3], [2, 5, 7])]
    cell = scalar_multicorrelation(tower, fs, [4, 30])
    step = [sum((fs[0] * koopman_apply(tower, fs[1], i) * koopman_apply(tower, fs[2], 2 * i)).integral()
                for i in range(1, n + 1)) / n for n in (4, 30)]
    assert list(cell.values) == step
    assert cell.descriptor["route"] == "cell"


def test_cat_characters_vanish_without_resonance():
    series = scalar_multicorrelation(cat_map(), [chi((1, 0)), chi((0, 1)), chi((1, 1))], [10, 1000])
    assert series.values == (0, 0)


def test_l2_defect_of_constants_is_zero():
    c = TrigPolynomial.constant(F(1, 2), 2)
    series = l2_multicorrelation_defect(cat_map(), [c, c], [8])
    assert series.squares == (0,)


def test_l2_defect_rotation_characters():
    # prod_p T^{p i} chi_1 = e^{-2 pi i (1 + 2) i alpha} chi_2, whose norm is 1 for every i
    # the partial sum is a sum of 5th roots of unity, so only its modulus is a float
    series = l2_multicorrelation_defect(Rotation(F(1, 5)), [chi((1,)), chi((1,))], [5, 7])
    assert series.values[0] == pytest.approx(0, abs=1e-12)
    brute = abs(sum(np.exp(-2j * np.pi * 3 * i / 5) for i in range(1, 8))) / 7
    assert series.values[1] == pytest.approx(brute, rel=1e-12)


def test_l2_defect_cell_route_exact_square():
    tower = RankOneTower(4)
    st_ = chacon_stage(1, terminal=4)
    f = StepFunction.indicator(st_.level_set([0])) - StepFunction.indicator(st_.level_set([1]))
    series = l2_multicorrelation_defect(tower, [f, f], [16])
    s = StepFunction.constant(0)
    for i in range(1, 17):
        s = s + koopman_apply(tower, f, i) * koopman_apply(tower, f, 2 * i)
    assert series.squares[0] == ((s * F(1, 16)) * (s * F(1, 16))).integral()


def test_csv_and_plot_data_are_deterministic():
    series = roth_average(CyclicShift(9), IntervalSet.interval(0, "1/3"), [3, 9])
    text = series.to_csv()
    assert text.splitlines()[0] == "N,value,exact_num,exact_den"
    assert text == roth_average(CyclicShift(9), IntervalSet.interval(0, "1/3"), [3, 9]).to_csv()
    assert len(series.to_plot_data().split()) == 4


def test_workers_do_not_change_results():
    sys, a = Rotation(F(7, 31)), IntervalSet.interval("1/10", "1/2")
    assert roth_average(sys, a, [50, 200], workers=1).values == roth_average(sys, a, [50, 200], workers=3).values


def test_schedule_and_class_validation():
    with pytest.raises(DomainError):
        roth_average(Identity(), IntervalSet.full(), [10, 5])
    with pytest.raises(ClassMismatchError):
        scalar_multicorrelation(Rotation(F(1, 3)), [chi((1,)), StepFunction.constant(1)], [4])
    with pytest.raises(ClassMismatchError):
        scalar_multicorrelation(cat_map(), [StepFunction.constant(1)] * 2, [4])


def test_golden_roth_average_near_limit():
    series = roth_average(Rotation(golden_approximant()), IntervalSet.interval(0, "1/4"), dyadic(7, 12))
    assert abs(float(series.last) - 1 / 32) < 2e-3
    assert all(v > 0 for v in series.values)


def test_positivity_certificate_golden():
    cert = positivity_certificate(Rotation(golden_approximant()), IntervalSet.interval(0, "1/4"), "1/20")
    assert cert.L == 987
    assert cert.lower_bound == F(1, 9870)
    assert cert.to_json()["return_bound"]["L"] == 987


def test_positivity_certificate_full_set():
    cert = positivity_certificate(Rotation(F(1, 3)), IntervalSet.full(), "1/10")
    assert cert.L == 1
    assert cert.lower_bound == F(7, 10)


def test_positivity_certificate_rejects():
    with pytest.raises(DomainError):
        positivity_certificate(Rotation(F(1, 3)), IntervalSet.interval(0, "1/10"), "1/20")
    with pytest.raises(UnsupportedError):
        positivity_certificate(cat_map(), IntervalSet.interval(0, "1/2"), "1/20")


def test_identity_system_defect_is_constant():
    a = IntervalSet.interval(0, "1/3")
    f = StepFunction.indicator(a) - a.measure
    series = l2_multicorrelation_defect(Identity(), [f, f], [1, 10, 100])
    # every term is f^2 and the target (int f)^2 is 0
    assert series.squares[0] == series.squares[1] == series.squares[2] == (f * f * f * f).integral()
    assert series.squares[0] > 0


def test_prefix_consistency():
    sys, fs = cat_map(), [TrigPolynomial.cosine((1, 0)), TrigPolynomial.cosine((1, 1))]
    incremental = l2_multicorrelation_defect(sys, fs, [16, 64, 256])
    alone = l2_multicorrelation_defect(sys, fs, [64])
    assert incremental.squares[1] == alone.squares[0]
    tower = RankOneTower(6)
    g = StepFunction.indicator(chacon_stage(2, terminal=6).level_set([1, 4]))
    assert scalar_multicorrelation(tower, [g] * 3, [5, 50, 500]).values[1] == \
        scalar_multicorrelation(tower, [g] * 3, [50]).last

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.errors import ClassMismatchError, DomainError
from ergolab.measure_algebra import (
    IntervalSet,
    PhaseSum,
    StepFunction,
    TrigPolynomial,
    as_rational,
    integrate,
    intersect,
    multiply,
    normalize,
    observable_from_json,
    observable_to_json,
    sup_norm,
    union,
)

from conftest import interval_sets, rationals

F = Fraction


def test_as_rational_refuses_floats():
    assert as_rational("3/7") == F(3, 7)
    assert as_rational([2, 6]) == F(1, 3)
    with pytest.raises(DomainError):
        as_rational(0.5)


def test_normalize_merges_and_rejects():
    s = normalize([(F(1, 2), F(3, 4)), (F(0), F(1, 4)), (F(1, 4), F(1, 3))])
    assert s.intervals == ((F(0), F(1, 3)), (F(1, 2), F(3, 4)))
    with pytest.raises(DomainError):
        normalize([(F(1, 2), F(1, 3))])
    with pytest.raises(DomainError):
        normalize([(F(-1, 2), F(1, 3))])


def test_interval_measure_and_translate():
    a = IntervalSet.interval("3/4", 1)
    assert a.measure == F(1, 4)
    b = a.translate(F(1, 8))
    assert b.intervals == ((F(0), F(1, 8)), (F(7, 8), F(1)))
    assert b.circle_components() == 1
    assert IntervalSet.full().circle_components() == 0


@given(interval_sets(), interval_sets())
def test_inclusion_exclusion(a, b):
    assert union(a, b).measure + intersect(a, b).measure == a.measure + b.measure
    assert a.complement().measure == 1 - a.measure


@given(interval_sets(), rationals)
def test_translation_preserves_measure(a, t):
    assert a.translate(t).measure == a.measure
    assert a.translate(t).translate(-t) == a


@given(interval_sets())
def test_interval_json_round_trip(a):
    assert IntervalSet.from_json(a.to_json()) == a


def test_step_function_arithmetic():
    f = StepFunction.indicator(IntervalSet.interval(0, "1/2")) * 3
    g = StepFunction.from_pieces([(F(1, 4), F(1), F(2))])
    assert (f + g).integral() == F(3, 2) + F(3, 2)
    assert (f * g).integral() == 3 * 2 * F(1, 4)
    assert f.l2_squared() == F(9, 2)
    assert sup_norm(f - g) == 3
    assert StepFunction.from_json(f.to_json()) == f


@given(interval_sets(), interval_sets())
def test_indicator_product_is_intersection(a, b):
    prod = StepFunction.indicator(a) * StepFunction.indicator(b)
    assert prod.integral() == intersect(a, b).measure


def test_phase_sum_exact_arithmetic():
    z = PhaseSum.phase(F(1, 3))
    assert (z * z * z).as_rational() == 1
    assert (z * z.conjugate()).as_rational() == 1
    assert PhaseSum.phase(F(1, 4)).as_gaussian() == (0, 1)
    assert abs(complex(z) - complex(-0.5, 3 ** 0.5 / 2)) < 1e-15
    assert PhaseSum.from_json(z.to_json()) == z


@settings(max_examples=50)
@given(st.lists(rationals, min_size=1, max_size=4))
def test_phase_sum_abs2_matches_complex(thetas):
    s = PhaseSum.gaussian(0)
    for t in thetas:
        s = s + PhaseSum.phase(t)
    assert abs(float(s.abs2()) - abs(complex(s)) ** 2) < 1e-9


def test_trig_polynomial_basics():
    c = TrigPolynomial.cosine((1, 0))
    assert c.real
    assert integrate(c).as_rational() == 0
    assert (c * c).l2_squared() == F(3, 8)
    assert (c * c).integral().as_rational() == F(1, 2)
    assert sup_norm(c) == 1
    assert TrigPolynomial.from_json(c.to_json()) == c
    chi = TrigPolynomial.character((2,))
    assert abs(chi(F(1, 8)) - 1j) < 1e-15


def test_mixed_classes_rejected():
    with pytest.raises(ClassMismatchError):
        multiply(StepFunction.constant(1), TrigPolynomial.constant(1))


def test_observable_json_kinds():
    for f in [StepFunction.indicator(IntervalSet.interval(0, "1/3")), TrigPolynomial.character((1, -2))]:
        assert observable_from_json(observable_to_json(f)) == f
    assert observable_from_json({"kind": "constant", "value": "2/3"}) == StepFunction.constant(F(2, 3))
    with pytest.raises(DomainError):
        observable_from_json({"kind": "gaussian"})

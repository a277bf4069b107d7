from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.averages import roth_average
from ergolab.correspondence import DensitySet, count_3aps, cyclic_roth_average
from ergolab.errors import DomainError
from ergolab.systems import CyclicShift
from ergolab.verify import brute_force_3aps

bitstrings = st.integers(1, 60).flatmap(lambda n: st.text("01", min_size=n, max_size=n))


def test_count_examples():
    assert count_3aps(DensitySet.full(5)) == 4
    assert count_3aps(DensitySet.from_members(5, [0, 1, 3, 4])) == 0
    assert count_3aps(DensitySet(7, "0" * 7), "cyclic") == 0
    with pytest.raises(DomainError):
        count_3aps(DensitySet.full(3), "circle")


def test_cyclic_roth_average_examples():
    assert cyclic_roth_average(DensitySet.full(11)) == 1
    assert cyclic_roth_average(DensitySet(4, "0000")) == 0


@settings(max_examples=100, deadline=None)
@given(bitstrings)
def test_cyclic_identity(bits):
    s = DensitySet(len(bits), bits)
    n = s.modulus
    assert cyclic_roth_average(s) * n * n == count_3aps(s, "cyclic") + s.size


@settings(max_examples=60, deadline=None)
@given(bitstrings)
def test_counts_match_brute_force(bits):
    s = DensitySet(len(bits), bits)
    members = set(s.members)
    assert count_3aps(s) == brute_force_3aps(members, s.modulus, cyclic=False)
    assert count_3aps(s, "cyclic") == brute_force_3aps(members, s.modulus, cyclic=True)


@settings(max_examples=40, deadline=None)
@given(bitstrings, st.data())
def test_monotone_under_supersets(bits, data):
    s = DensitySet(len(bits), bits)
    extra = data.draw(st.lists(st.integers(0, s.modulus - 1), max_size=5))
    t = s | DensitySet.from_members(s.modulus, extra)
    for mode in ("integer-line", "cyclic"):
        assert count_3aps(t, mode) >= count_3aps(s, mode)


@settings(max_examples=25, deadline=None)
@given(bitstrings)
def test_cyclic_shift_equivalence(bits):
    s = DensitySet(len(bits), bits)
    series = roth_average(CyclicShift(s.modulus), s.as_interval_set(), [s.modulus])
    assert series.last == cyclic_roth_average(s)


def test_random_set_identity_n200():
    s = DensitySet.random(200, 0.5, np.random.default_rng(3))
    assert cyclic_roth_average(s) * 200 ** 2 == count_3aps(s, "cyclic") + s.size


def test_json_forms():
    s = DensitySet.from_members(12, [0, 1, 2, 5, 9, 10, 11])
    assert s.to_json()["runs"] == [[0, 3], [5, 1], [9, 3]]
    assert DensitySet.from_json(s.to_json()) == s
    assert DensitySet.from_json(str(s)) == s
    assert s.density == Fraction(7, 12)
    with pytest.raises(DomainError):
        DensitySet(3, "012")

"""Empirical joining functionals evaluated on finite tensor families.

A joining is never stored as a measure on a product space.  It is a
multilinear functional, and what we can compute is its finite-``N`` value on
tensors of observables:

* ``nu(f (x) g (x) h) ~ (1/N) sum_i int f T^i g T^{2i} h`` (order 3, this is also
  the pairing ``<J f, g (x) h>``);
* ``eta(f, g, h, f', g', h') ~ (1/N^2) sum_{i,j} int T^i f T^{2i} g T^{3i} h
  T^j f' T^{2j} g' T^{3j} h'`` (order 6).

Shifting the iterated slots by the product map reindexes the Cesaro sum, so
the two values differ only by boundary terms.  This is the telescoping bound
``(2/N) prod sup_norm`` carried by every :class:`JoiningEstimate`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .averages import (
    _CellSweep,
    _exact_dot,
    _route,
    _step_partials,
    _trig_partials,
    as_number,
    magnitude,
    scalar_multicorrelation,
)
from .errors import CostGuardError, DomainError
from .measure_algebra import Observable, PhaseSum, integrate, observable_to_json, rational_pair, sup_norm
from .systems import System, koopman_apply

ORDER6_CAP = 2 ** 12

# Exponent applied to each slot by the three invariance patterns.
PATTERNS = {
    "J": (0, 1, 2),
    "nu": (0, 1, 2),
    "eta": (0, 0, 0, 1, 2, 3),
}


def _value_json(v):
    if isinstance(v, Fraction):
        return rational_pair(v)
    if isinstance(v, PhaseSum):
        r = v.as_rational()
        return rational_pair(r) if r is not None else v.to_json()
    return v


def _sup_product(fs) -> Fraction:
    out = Fraction(1)
    for f in fs:
        out *= sup_norm(f)
    return out


@dataclass(frozen=True)
class JoiningEstimate:
    order: int
    value: object
    N: int
    invariance_defect_bound: Fraction
    pattern: str
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.order not in (3, 6):
            raise DomainError(f"joining order must be 3 or 6, got {self.order}")

    @property
    def number(self):
        return as_number(self.value)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "value": _value_json(self.value),
            "value_float": magnitude(self.value) if isinstance(as_number(self.value), complex)
            else float(as_number(self.value)),
            "N": self.N,
            "invariance_defect_bound": rational_pair(self.invariance_defect_bound),
            "pattern": self.pattern,
            "descriptor": self.descriptor,
        }


def _descriptor(sys, fs):
    return {"system": sys.to_json(), "observables": [observable_to_json(f) for f in fs]}


def empirical_joining_3(sys: System, f: Observable, g: Observable, h: Observable, N: int) -> JoiningEstimate:
    """``(1/N) sum_{i=1}^N int f T^i g T^{2i} h``."""
    if N < 1:
        raise DomainError("N must be positive")
    series = scalar_multicorrelation(sys, [f, g, h], (N,))
    fs = (f, g, h)
    return JoiningEstimate(3, series.last, N, Fraction(2, N) * _sup_product(fs), "nu", _descriptor(sys, fs))


def _triple_sum(sys, route, fs, N):
    """``sum_{i=1}^N T^i f_0 T^{2i} f_1 T^{3i} f_2`` in the route's own representation."""
    if route == "trig":
        return _trig_partials(sys, list(fs), None, (N,), "function", 1, N)[0]
    if route == "step":
        return _step_partials(sys, list(fs), None, (N,), "function", 1, N)[0]
    sweep = _CellSweep(sys, list(fs), N)
    sweep.advance(N)
    return sweep


def _pair(route, a, b, N, dim=None):
    if route == "trig":
        total = PhaseSum.gaussian(0)
        for mode, c in a.items():
            w = b.get(tuple(-v for v in mode))
            if w is not None:
                total = total + c * w
        total = total * Fraction(1, N * N)
        r = total.as_rational()
        return r if r is not None else total
    if route == "step":
        return (a * b).integral() / (N * N)
    scale = a.h * N * N * a.den * b.den
    if a.exact and b.exact:
        return Fraction(_exact_dot(a.acc, b.acc), scale)
    return float(np.dot(a.acc.astype(np.float64), b.acc.astype(np.float64))) / scale


def empirical_joining_6(sys: System, f: Observable, g: Observable, h: Observable,
                        f2: Observable, g2: Observable, h2: Observable, N: int,
                        *, cap: int = ORDER6_CAP) -> JoiningEstimate:
    """``(1/N^2) sum_{i,j=1}^N int T^i f T^{2i} g T^{3i} h T^j f2 T^{2j} g2 T^{3j} h2``.

    The double sum is evaluated by pairing the two single sums, so the cost is
    two sweeps plus one pairing rather than ``N^2`` integrals.  The cap is kept
    so that large-``N`` work goes through
    :func:`~ergolab.averages.l2_multicorrelation_defect`.
    """
    if N < 1:
        raise DomainError("N must be positive")
    if N > cap:
        raise CostGuardError(f"order-6 joining limited to N <= {cap}; use l2_multicorrelation_defect")
    fs = (f, g, h, f2, g2, h2)
    route = _route(sys, list(fs))
    first = _triple_sum(sys, route, fs[:3], N)
    second = _triple_sum(sys, route, fs[3:], N)
    value = _pair(route, first, second, N)
    return JoiningEstimate(6, value, N, Fraction(2, N) * _sup_product(fs), "eta", _descriptor(sys, fs))


def _apply_pattern(sys, fs, pattern):
    try:
        shifts = PATTERNS[pattern]
    except KeyError:
        raise DomainError(f"unknown pattern {pattern!r}; expected one of {sorted(PATTERNS)}") from None
    if len(fs) != len(shifts):
        raise DomainError(f"pattern {pattern!r} needs {len(shifts)} observables, got {len(fs)}")
    return [koopman_apply(sys, f, k) for f, k in zip(fs, shifts)]


def _evaluate(sys, fs, N, pattern):
    if pattern == "eta":
        return empirical_joining_6(sys, *fs, N).value
    return empirical_joining_3(sys, *fs, N).value


def _abs(v):
    # exact for rational values, float for genuinely complex ones
    if isinstance(v, PhaseSum):
        r = v.as_rational()
        return abs(r) if r is not None else magnitude(v)
    return abs(v)


def invariance_defect(sys: System, fs: Sequence[Observable], N: int, pattern: str):
    """``|value(fs) - value(pattern applied to fs)|`` at ``N``.

    Patterns: ``"J"`` and ``"nu"`` shift ``(f, g, h)`` to ``(f, T g, T^2 h)``;
    ``"eta"`` shifts the last three of six slots by ``(T, T^2, T^3)``.
    The result is exact (a Fraction) whenever both values are rational.
    """
    fs = list(fs)
    shifted = _apply_pattern(sys, fs, pattern)
    return _abs(_difference(_evaluate(sys, fs, N, pattern), _evaluate(sys, shifted, N, pattern)))


def _difference(a, b):
    if isinstance(a, PhaseSum) or isinstance(b, PhaseSum):
        d = PhaseSum.coerce(a) - PhaseSum.coerce(b)
        r = d.as_rational()
        return r if r is not None else d
    return a - b


def defect_bound(fs: Sequence[Observable], N: int) -> Fraction:
    """The telescoping bound ``(2/N) prod sup_norm(f)``."""
    return Fraction(2, N) * _sup_product(fs)


def within_bound(defect, bound: Fraction) -> bool:
    """``defect <= bound``, decided exactly when the defect is exact."""
    if isinstance(defect, Fraction):
        return defect <= bound
    return defect <= float(bound) * (1 + 1e-12)


def product_splitting_defect(sys: System, f: Observable, g: Observable, h: Observable, N: int):
    """``|nu_N(f, g, h) - int f int g int h|``; tends to 0 for weakly mixing systems."""
    value = empirical_joining_3(sys, f, g, h, N).value
    prod = None
    for x in (f, g, h):
        v = integrate(x)
        prod = v if prod is None else prod * v
    return _abs(_difference(value, prod))


def resonant_character_triple(bound: int = 3) -> tuple[int, int, int]:
    """Smallest nonzero character triple ``(a, b, c)`` whose rotation correlation never decays.

    ``int chi_a T^i chi_b T^{2i} chi_c = e^{-2 pi i (b + 2c) i alpha} [a + b + c = 0]``
    for a rotation, so the average stays at 1 exactly when ``b + 2c = 0`` and
    ``a + b + c = 0``.  The scan orders candidates by max-norm, then lexicographically.
    """
    cands = []
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            for c in range(-bound, bound + 1):
                if (a, b, c) != (0, 0, 0) and b + 2 * c == 0 and a + b + c == 0:
                    cands.append((max(abs(a), abs(b), abs(c)), (a, b, c)))
    if not cands:
        raise DomainError(f"no resonant triple with entries bounded by {bound}")
    return min(cands)[1]

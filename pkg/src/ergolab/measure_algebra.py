"""Exact set and function algebra on [0, 1) and on torus character lattices.

Everything here is built on :class:`fractions.Fraction`.  Two observable
classes exist side by side:

* :class:`StepFunction` -- rational step functions on [0, 1), acted on by the
  one-dimensional systems (identity, rotations, cyclic shifts, rank-one towers);
* :class:`TrigPolynomial` -- finitely supported Fourier series on a torus
  ``T^d``, acted on by rotations, torus automorphisms and their products.

Coefficients of trigonometric polynomials are :class:`PhaseSum` values, finite
sums ``sum_k c_k exp(2 pi i theta_k)`` with Gaussian-rational ``c_k`` and
rational ``theta_k``.  That keeps rotation phases exact.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as _cartesian
from typing import Iterable, Iterator, Mapping, Sequence, Union

import mpmath

from .errors import ClassMismatchError, DomainError

_ZERO = Fraction(0)
_ONE = Fraction(1)
_QUARTER = Fraction(1, 4)

_MP_DPS = 40


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions, ``"p/q"`` strings and ``[p, q]`` pairs to Fraction.

    Floats are refused so that inexact input cannot leak into exact code.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise DomainError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return Fraction(int(x[0]), int(x[1]))
    raise DomainError(f"not an exact rational: {x!r}")


def rational_pair(x: Fraction) -> list[int]:
    return [x.numerator, x.denominator]


def _sqrt(x: Fraction) -> float:
    with mpmath.workdps(_MP_DPS):
        return float(mpmath.sqrt(mpmath.mpf(x.numerator) / x.denominator))


# --------------------------------------------------------------------------
# Exact complex scalars with rational phases
# --------------------------------------------------------------------------

Gaussian = tuple  # (re: Fraction, im: Fraction)


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


_I_POWERS = ((_ONE, _ZERO), (_ZERO, _ONE), (-_ONE, _ZERO), (_ZERO, -_ONE))


class PhaseSum:
    """Exact element ``sum_theta c_theta * exp(2 pi i theta)`` with Gaussian-rational ``c_theta``.

    Phases are reduced into ``[0, 1/4)``; the quarter turns are folded into the
    coefficient as powers of ``i``, so Gaussian rationals have the single phase 0.
    Remaining cyclotomic relations (for instance third roots of unity summing to
    zero) are not reduced, so equality is structural.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Fraction, Gaussian] | None = None):
        out: dict[Fraction, Gaussian] = {}
        if terms:
            for theta, c in terms.items():
                _accumulate(out, as_rational(theta), (as_rational(c[0]), as_rational(c[1])))
        self._terms = out

    @classmethod
    def _raw(cls, terms: dict) -> "PhaseSum":
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    @classmethod
    def gaussian(cls, re=0, im=0) -> "PhaseSum":
        re, im = as_rational(re), as_rational(im)
        if re == 0 and im == 0:
            return cls._raw({})
        return cls._raw({_ZERO: (re, im)})

    @classmethod
    def phase(cls, theta, re=1, im=0) -> "PhaseSum":
        """``(re + i im) * exp(2 pi i theta)``."""
        return cls({as_rational(theta): (re, im)})

    @classmethod
    def coerce(cls, x) -> "PhaseSum":
        if isinstance(x, PhaseSum):
            return x
        if isinstance(x, complex):
            raise DomainError("complex floats are not exact; use PhaseSum.gaussian")
        if isinstance(x, tuple) and len(x) == 2:
            return cls.gaussian(*x)
        return cls.gaussian(as_rational(x))

    @property
    def terms(self) -> dict[Fraction, Gaussian]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def as_gaussian(self) -> Gaussian | None:
        """``(re, im)`` when the value is a Gaussian rational, else None."""
        if not self._terms:
            return (_ZERO, _ZERO)
        if len(self._terms) == 1 and _ZERO in self._terms:
            return self._terms[_ZERO]
        return None

    def as_rational(self) -> Fraction | None:
        g = self.as_gaussian()
        if g is None or g[1] != 0:
            return None
        return g[0]

    def __add__(self, other):
        other = PhaseSum.coerce(other)
        out = dict(self._terms)
        for theta, c in other._terms.items():
            _accumulate(out, theta, c)
        return PhaseSum._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return PhaseSum._raw({t: (-c[0], -c[1]) for t, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-PhaseSum.coerce(other))

    def __rsub__(self, other):
        return PhaseSum.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                return PhaseSum._raw({})
            return PhaseSum._raw({t: (c[0] * other, c[1] * other) for t, c in self._terms.items()})
        other = PhaseSum.coerce(other)
        a, b = self._terms, other._terms
        if len(a) == 1 and len(b) == 1:
            (ta, ca), = a.items()
            (tb, cb), = b.items()
            out: dict = {}
            _accumulate(out, ta + tb, _gmul(ca, cb))
            return PhaseSum._raw(out)
        out = {}
        for ta, ca in a.items():
            for tb, cb in b.items():
                _accumulate(out, ta + tb, _gmul(ca, cb))
        return PhaseSum._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_rational(other)
        return self * (1 / other)

    def rotate(self, theta) -> "PhaseSum":
        """Multiply by ``exp(2 pi i theta)``."""
        theta = as_rational(theta)
        if theta == 0 or not self._terms:
            return self
        out: dict = {}
        for t, c in self._terms.items():
            _accumulate(out, t + theta, c)
        return PhaseSum._raw(out)

    def conjugate(self) -> "PhaseSum":
        out: dict = {}
        for t, c in self._terms.items():
            _accumulate(out, -t, (c[0], -c[1]))
        return PhaseSum._raw(out)

    def abs2(self) -> Fraction | float:
        """``|z|^2``: exact when the value has a single phase, else a float."""
        if len(self._terms) <= 1:
            if not self._terms:
                return _ZERO
            (c,) = self._terms.values()
            return c[0] * c[0] + c[1] * c[1]
        z = complex(self)
        return z.real * z.real + z.imag * z.imag

    def modulus_bound(self) -> Fraction:
        """A rational upper bound for ``|z|`` (exact for a single axis-aligned term)."""
        total = _ZERO
        for re, im in self._terms.values():
            if im == 0:
                total += abs(re)
            elif re == 0:
                total += abs(im)
            else:
                total += _rational_sqrt_ceiling(re * re + im * im)
        return total

    def __complex__(self) -> complex:
        with mpmath.workdps(_MP_DPS):
            acc = mpmath.mpc(0)
            for t, (re, im) in self._terms.items():
                c = mpmath.mpc(mpmath.mpf(re.numerator) / re.denominator,
                               mpmath.mpf(im.numerator) / im.denominator)
                acc += c * mpmath.expjpi(2 * mpmath.mpf(t.numerator) / t.denominator)
            return complex(acc)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, tuple, PhaseSum)) and not isinstance(other, bool):
            return self._terms == PhaseSum.coerce(other)._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        g = self.as_gaussian()
        if g is not None:
            return f"PhaseSum({g[0]} + {g[1]}i)"
        parts = ", ".join(f"{t}: ({c[0]}, {c[1]})" for t, c in sorted(self._terms.items()))
        return f"PhaseSum({{{parts}}})"

    def to_json(self):
        g = self.as_gaussian()
        if g is not None:
            return [g[0].numerator, g[0].denominator, g[1].numerator, g[1].denominator]
        return [[t.numerator, t.denominator, c[0].numerator, c[0].denominator,
                 c[1].numerator, c[1].denominator] for t, c in sorted(self._terms.items())]

    @classmethod
    def from_json(cls, data) -> "PhaseSum":
        if data and isinstance(data[0], list):
            return cls({Fraction(r[0], r[1]): (Fraction(r[2], r[3]), Fraction(r[4], r[5])) for r in data})
        return cls.gaussian(Fraction(data[0], data[1]), Fraction(data[2], data[3]))


def _accumulate(out: dict, theta: Fraction, c: Gaussian) -> None:
    theta = theta - math.floor(theta)
    if theta >= _QUARTER:
        k = math.floor(theta * 4)
        theta -= Fraction(k, 4)
        c = _gmul(c, _I_POWERS[k])
    prev = out.get(theta)
    if prev is not None:
        c = (prev[0] + c[0], prev[1] + c[1])
    if c[0] == 0 and c[1] == 0:
        out.pop(theta, None)
    else:
        out[theta] = c


def _rational_sqrt_ceiling(x: Fraction) -> Fraction:
    # 2^-60 resolution upward rounding
    scale = 1 << 60
    n = math.isqrt(x.numerator * scale * scale // x.denominator) + 1
    return Fraction(n, scale)


# --------------------------------------------------------------------------
# Interval sets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalSet:
    """Finite disjoint union of half-open rational intervals in [0, 1).

    Build through :func:`normalize` (or the classmethods); the constructor trusts
    its input to be canonical.
    """

    intervals: tuple[tuple[Fraction, Fraction], ...] = ()

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def full(cls) -> "IntervalSet":
        return cls(((_ZERO, _ONE),))

    @classmethod
    def interval(cls, lo, hi) -> "IntervalSet":
        return normalize([(lo, hi)])

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), _ZERO)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __bool__(self):
        return bool(self.intervals)

    def contains(self, x) -> bool:
        x = as_rational(x)
        k = bisect.bisect_right(self.intervals, (x, _ONE + 1)) - 1
        return k >= 0 and self.intervals[k][0] <= x < self.intervals[k][1]

    def __contains__(self, x):
        return self.contains(x)

    def __and__(self, other: "IntervalSet") -> "IntervalSet":
        return intersect(self, other)

    def __or__(self, other: "IntervalSet") -> "IntervalSet":
        return union(self, other)

    def complement(self) -> "IntervalSet":
        out = []
        cursor = _ZERO
        for lo, hi in self.intervals:
            if lo > cursor:
                out.append((cursor, lo))
            cursor = hi
        if cursor < 1:
            out.append((cursor, _ONE))
        return IntervalSet(tuple(out))

    def __sub__(self, other: "IntervalSet") -> "IntervalSet":
        return intersect(self, other.complement())

    def translate(self, t) -> "IntervalSet":
        """Image under ``x -> x + t mod 1``."""
        t = as_rational(t)
        t -= math.floor(t)
        if t == 0:
            return self
        pieces = []
        for lo, hi in self.intervals:
            lo, hi = lo + t, hi + t
            if hi <= 1:
                pieces.append((lo, hi))
            elif lo >= 1:
                pieces.append((lo - 1, hi - 1))
            else:
                pieces.append((lo, _ONE))
                pieces.append((_ZERO, hi - 1))
        return _canonical(pieces)

    def circle_components(self) -> int:
        """Number of connected components when [0, 1) is glued into a circle."""
        k = len(self.intervals)
        if k >= 2 and self.intervals[0][0] == 0 and self.intervals[-1][1] == 1:
            k -= 1
        if k == 1 and self.intervals[0] == (_ZERO, _ONE):
            return 0
        return k

    def to_json(self) -> dict:
        return {"intervals": [[rational_pair(lo), rational_pair(hi)] for lo, hi in self.intervals]}

    @classmethod
    def from_json(cls, data) -> "IntervalSet":
        raw = data["intervals"] if isinstance(data, dict) else data
        return normalize([(as_rational(lo), as_rational(hi)) for lo, hi in raw])

    def __repr__(self):
        body = ", ".join(f"[{lo}, {hi})" for lo, hi in self.intervals)
        return f"IntervalSet({body})"


def _canonical(pieces: Iterable[tuple[Fraction, Fraction]]) -> IntervalSet:
    out: list[list[Fraction]] = []
    for lo, hi in sorted(p for p in pieces if p[0] < p[1]):
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return IntervalSet(tuple((lo, hi) for lo, hi in out))


def normalize(raw: Iterable[Sequence]) -> IntervalSet:
    """Canonical :class:`IntervalSet` with the same indicator as ``raw``.

    ``raw`` holds ``(lo, hi)`` pairs with ``0 <= lo <= hi <= 1``; overlaps and
    adjacent pieces are merged, empty pieces dropped.
    """
    pieces = []
    for k, item in enumerate(raw):
        if isinstance(item, IntervalSet):
            pieces.extend(item.intervals)
            continue
        lo, hi = (as_rational(v) for v in item)
        if lo > hi:
            raise DomainError(f"interval {k}: lo={lo} exceeds hi={hi}")
        if lo < 0 or hi > 1:
            raise DomainError(f"interval {k}: endpoints [{lo}, {hi}) outside [0, 1]")
        pieces.append((lo, hi))
    return _canonical(pieces)


def intersect(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    out = []
    x, y = a.intervals, b.intervals
    i = j = 0
    while i < len(x) and j < len(y):
        lo = max(x[i][0], y[j][0])
        hi = min(x[i][1], y[j][1])
        if lo < hi:
            out.append((lo, hi))
        if x[i][1] < y[j][1]:
            i += 1
        else:
            j += 1
    return IntervalSet(tuple(out))


def union(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return _canonical(a.intervals + b.intervals)


# --------------------------------------------------------------------------
# Step functions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StepFunction:
    """Rational step function on [0, 1).

    Piece ``k`` is ``[breakpoints[k], breakpoints[k+1])`` (the last piece ends at 1)
    and carries ``values[k]``.  ``breakpoints[0]`` is always 0 and consecutive
    values differ.
    """

    breakpoints: tuple[Fraction, ...] = (_ZERO,)
    values: tuple[Fraction, ...] = (_ZERO,)

    def __post_init__(self):
        if len(self.breakpoints) != len(self.values) or not self.breakpoints:
            raise DomainError("breakpoints and values must be nonempty and of equal length")
        if self.breakpoints[0] != 0:
            raise DomainError("first breakpoint must be 0")

    @classmethod
    def constant(cls, c) -> "StepFunction":
        return cls((_ZERO,), (as_rational(c),))

    @classmethod
    def indicator(cls, a: IntervalSet) -> "StepFunction":
        return cls.from_pieces((lo, hi, _ONE) for lo, hi in a.intervals)

    @classmethod
    def from_pieces(cls, pieces: Iterable[Sequence], default=0) -> "StepFunction":
        """Build from disjoint ``(lo, hi, value)`` pieces; gaps take ``default``."""
        default = as_rational(default)
        items = sorted((as_rational(lo), as_rational(hi), as_rational(v)) for lo, hi, v in pieces)
        segments: list[tuple[Fraction, Fraction]] = []
        cursor = _ZERO
        for lo, hi, v in items:
            if lo >= hi:
                continue
            if lo < cursor or lo < 0 or hi > 1:
                raise DomainError(f"overlapping or out-of-range piece [{lo}, {hi})")
            if lo > cursor:
                segments.append((cursor, default))
            segments.append((lo, v))
            cursor = hi
        if cursor < 1:
            segments.append((cursor, default))
        bps: list[Fraction] = []
        vals: list[Fraction] = []
        for start, v in segments:
            if vals and vals[-1] == v:
                continue
            bps.append(start)
            vals.append(v)
        return cls(tuple(bps), tuple(vals))

    def pieces(self) -> Iterator[tuple[Fraction, Fraction, Fraction]]:
        ends = self.breakpoints[1:] + (_ONE,)
        return zip(self.breakpoints, ends, self.values)

    def __call__(self, x) -> Fraction:
        x = as_rational(x)
        if not 0 <= x < 1:
            raise DomainError(f"{x} outside [0, 1)")
        return self.values[bisect.bisect_right(self.breakpoints, x) - 1]

    def integral(self) -> Fraction:
        return sum(((hi - lo) * v for lo, hi, v in self.pieces()), _ZERO)

    def _combine(self, other: "StepFunction", op) -> "StepFunction":
        if not isinstance(other, StepFunction):
            raise ClassMismatchError(f"cannot combine StepFunction with {type(other).__name__}")
        a_bp, a_v, b_bp, b_v = self.breakpoints, self.values, other.breakpoints, other.values
        bps, vals = [], []
        i = j = 0
        na, nb = len(a_bp), len(b_bp)
        x = _ZERO
        while True:
            v = op(a_v[i], b_v[j])
            if not vals or vals[-1] != v:
                bps.append(x)
                vals.append(v)
            na_next = a_bp[i + 1] if i + 1 < na else None
            nb_next = b_bp[j + 1] if j + 1 < nb else None
            if na_next is None and nb_next is None:
                break
            if nb_next is None or (na_next is not None and na_next < nb_next):
                x = na_next
                i += 1
            elif na_next is None or nb_next < na_next:
                x = nb_next
                j += 1
            else:
                x = na_next
                i += 1
                j += 1
        return StepFunction(tuple(bps), tuple(vals))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = StepFunction.constant(other)
        return self._combine(other, lambda u, v: u + v)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = StepFunction.constant(other)
        return self._combine(other, lambda u, v: u - v)

    def __neg__(self):
        return StepFunction(self.breakpoints, tuple(-v for v in self.values))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            c = as_rational(other)
            if c == 0:
                return StepFunction.constant(0)
            return StepFunction(self.breakpoints, tuple(v * c for v in self.values))
        return self._combine(other, lambda u, v: u * v)

    __rmul__ = __mul__

    def conjugate(self) -> "StepFunction":
        return self

    def l2_squared(self) -> Fraction:
        return sum(((hi - lo) * v * v for lo, hi, v in self.pieces()), _ZERO)

    def sup_norm(self) -> Fraction:
        return max(abs(v) for v in self.values)

    def support(self) -> IntervalSet:
        return normalize((lo, hi) for lo, hi, v in self.pieces() if v != 0)

    def to_json(self) -> dict:
        return {"kind": "step",
                "breakpoints": [rational_pair(b) for b in self.breakpoints],
                "values": [rational_pair(v) for v in self.values]}

    @classmethod
    def from_json(cls, data) -> "StepFunction":
        bps = [as_rational(b) for b in data["breakpoints"]]
        vals = [as_rational(v) for v in data["values"]]
        ends = bps[1:] + [_ONE]
        return cls.from_pieces(zip(bps, ends, vals))


# --------------------------------------------------------------------------
# Trigonometric polynomials
# --------------------------------------------------------------------------

Mode = tuple


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Finite Fourier series ``sum_a c_a exp(2 pi i a.x)`` on the d-torus.

    ``coefficients`` maps integer lattice points (tuples of length ``dim``) to
    :class:`PhaseSum` values.  With ``real=True`` the conjugate symmetry
    ``c_{-a} = conj(c_a)`` is checked on construction.
    """

    dim: int
    coefficients: Mapping[Mode, PhaseSum] = field(default_factory=dict)
    real: bool = False

    def __post_init__(self):
        clean = {}
        for mode, c in self.coefficients.items():
            mode = tuple(int(v) for v in mode)
            if len(mode) != self.dim:
                raise DomainError(f"mode {mode} does not have dimension {self.dim}")
            c = PhaseSum.coerce(c)
            if not c.is_zero():
                clean[mode] = c
        object.__setattr__(self, "coefficients", clean)
        if self.real and not self._conjugate_symmetric():
            raise DomainError("coefficients flagged real-valued are not conjugate symmetric")

    @classmethod
    def constant(cls, c, dim: int = 1) -> "TrigPolynomial":
        c = PhaseSum.coerce(c)
        return cls(dim, {(0,) * dim: c}, real=c.as_rational() is not None)

    @classmethod
    def character(cls, mode: Sequence[int]) -> "TrigPolynomial":
        mode = tuple(mode)
        return cls(len(mode), {mode: PhaseSum.gaussian(1)}, real=not any(mode))

    @classmethod
    def cosine(cls, mode: Sequence[int], amplitude=1) -> "TrigPolynomial":
        """``amplitude * cos(2 pi a.x)``."""
        mode = tuple(mode)
        half = as_rational(amplitude) / 2
        if not any(mode):
            return cls.constant(2 * half, len(mode))
        neg = tuple(-v for v in mode)
        return cls(len(mode), {mode: PhaseSum.gaussian(half), neg: PhaseSum.gaussian(half)}, real=True)

    @classmethod
    def sine(cls, mode: Sequence[int], amplitude=1) -> "TrigPolynomial":
        """``amplitude * sin(2 pi a.x)``."""
        mode = tuple(mode)
        half = as_rational(amplitude) / 2
        neg = tuple(-v for v in mode)
        return cls(len(mode), {mode: PhaseSum.gaussian(0, -half), neg: PhaseSum.gaussian(0, half)}, real=True)

    def _conjugate_symmetric(self) -> bool:
        for mode, c in self.coefficients.items():
            other = self.coefficients.get(tuple(-v for v in mode))
            if other is None or other != c.conjugate():
                return False
        return True

    def coeff(self, mode) -> PhaseSum:
        return self.coefficients.get(tuple(mode), PhaseSum.gaussian(0))

    def __len__(self):
        return len(self.coefficients)

    def integral(self) -> PhaseSum:
        return self.coeff((0,) * self.dim)

    def _check(self, other):
        if not isinstance(other, TrigPolynomial):
            raise ClassMismatchError(f"cannot combine TrigPolynomial with {type(other).__name__}")
        if other.dim != self.dim:
            raise ClassMismatchError(f"torus dimensions differ: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, PhaseSum)):
            other = TrigPolynomial.constant(other, self.dim)
        self._check(other)
        out = dict(self.coefficients)
        for mode, c in other.coefficients.items():
            out[mode] = out[mode] + c if mode in out else c
        return TrigPolynomial(self.dim, out, real=self.real and other.real)

    __radd__ = __add__

    def __neg__(self):
        return TrigPolynomial(self.dim, {m: -c for m, c in self.coefficients.items()}, real=self.real)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, PhaseSum)):
            other = TrigPolynomial.constant(other, self.dim)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return TrigPolynomial(self.dim, {m: c * other for m, c in self.coefficients.items()},
                                  real=self.real)
        if isinstance(other, PhaseSum):
            return TrigPolynomial(self.dim, {m: c * other for m, c in self.coefficients.items()})
        self._check(other)
        out: dict = {}
        for (ma, ca), (mb, cb) in _cartesian(self.coefficients.items(), other.coefficients.items()):
            mode = tuple(x + y for x, y in zip(ma, mb))
            prod = ca * cb
            out[mode] = out[mode] + prod if mode in out else prod
        return TrigPolynomial(self.dim, out, real=self.real and other.real)

    __rmul__ = __mul__

    def conjugate(self) -> "TrigPolynomial":
        return TrigPolynomial(self.dim, {tuple(-v for v in m): c.conjugate()
                                         for m, c in self.coefficients.items()}, real=self.real)

    def l2_squared(self) -> Fraction | float:
        """Parseval: ``sum |c_a|^2``; exact unless some coefficient mixes phases."""
        total: Fraction | float = _ZERO
        for c in self.coefficients.values():
            total = total + c.abs2()
        return total

    def sup_norm(self) -> Fraction:
        """Rational upper bound ``sum |c_a|`` for the sup norm.

        Exact for single characters, real cosines and constants.
        """
        return sum((c.modulus_bound() for c in self.coefficients.values()), _ZERO)

    def __call__(self, x) -> complex:
        if not isinstance(x, (list, tuple)):
            x = (x,)
        total = 0j
        for mode, c in self.coefficients.items():
            t = sum(a * (xi if isinstance(xi, Fraction) else mpmath.mpf(xi)) for a, xi in zip(mode, x))
            if isinstance(t, Fraction):
                t = mpmath.mpf(t.numerator) / t.denominator
            total += complex(c) * complex(mpmath.expjpi(2 * t))
        return total

    def __eq__(self, other):
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        return self.dim == other.dim and self.coefficients == other.coefficients

    __hash__ = None

    def __repr__(self):
        return f"TrigPolynomial(dim={self.dim}, {len(self.coefficients)} terms)"

    def to_json(self) -> dict:
        return {"kind": "trig", "dim": self.dim, "real": self.real,
                "coefficients": {",".join(map(str, m)): c.to_json()
                                 for m, c in sorted(self.coefficients.items())}}

    @classmethod
    def from_json(cls, data) -> "TrigPolynomial":
        coeffs = {tuple(int(v) for v in key.split(",")): PhaseSum.from_json(val)
                  for key, val in data["coefficients"].items()}
        return cls(int(data["dim"]), coeffs, real=bool(data.get("real", False)))


Observable = Union[StepFunction, TrigPolynomial]


# --------------------------------------------------------------------------
# Module-level contract
# --------------------------------------------------------------------------


def indicator(a: IntervalSet) -> StepFunction:
    return StepFunction.indicator(a)


def integrate(f: Observable):
    """Exact Lebesgue integral: a Fraction for step functions, a PhaseSum for trig polynomials."""
    if isinstance(f, (StepFunction, TrigPolynomial)):
        return f.integral()
    raise ClassMismatchError(f"not an observable: {type(f).__name__}")


def multiply(f: Observable, g: Observable) -> Observable:
    if type(f) is not type(g):
        raise ClassMismatchError(f"cannot multiply {type(f).__name__} by {type(g).__name__}")
    return f * g


def l2_squared(f: Observable):
    return f.l2_squared()


def l2_norm(f: Observable) -> float:
    """``sqrt(integrate(f * conj(f)))`` evaluated at 40 significant digits."""
    sq = f.l2_squared()
    if isinstance(sq, Fraction):
        return _sqrt(sq)
    return math.sqrt(max(sq, 0.0))


def sup_norm(f: Observable) -> Fraction:
    return f.sup_norm()


def observable_to_json(f: Observable) -> dict:
    return f.to_json()


def observable_from_json(data: dict) -> Observable:
    kind = data.get("kind")
    if kind == "step":
        return StepFunction.from_json(data)
    if kind == "trig":
        return TrigPolynomial.from_json(data)
    if kind == "indicator":
        return StepFunction.indicator(IntervalSet.from_json(data))
    if kind == "character":
        return TrigPolynomial.character(data["mode"])
    if kind == "cosine":
        return TrigPolynomial.cosine(data["mode"], as_rational(data.get("amplitude", 1)))
    if kind == "constant":
        if "dim" in data:
            return TrigPolynomial.constant(as_rational(data["value"]), int(data["dim"]))
        return StepFunction.constant(as_rational(data["value"]))
    raise DomainError(f"unknown observable kind {kind!r}")

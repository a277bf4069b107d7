"""Explicit invertible measure-preserving systems with exact iterates.

Convention: ``T^i f`` means ``f o T^{-i}``.  With it ``T^i chi_A = chi_{T^i A}``,
so a set expression such as ``mu(A & T^i A & T^{2i} A)`` and the integral
``int chi_A T^i chi_A T^{2i} chi_A`` are literally the same computation.

For a torus automorphism ``T x = M x`` this gives ``T^i chi_a = chi_{B^i a}``
with ``B = (M^T)^{-1}``; for a rotation ``T x = x + alpha`` it gives
``T^i chi_a = exp(-2 pi i a i alpha) chi_a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ClassMismatchError, CostGuardError, DomainError, HorizonError, UnsupportedError
from .measure_algebra import (
    IntervalSet,
    Observable,
    StepFunction,
    TrigPolynomial,
    as_rational,
    normalize,
    rational_pair,
)

Piece = tuple  # (lo: Fraction, hi: Fraction, value)
Matrix = tuple  # tuple of row tuples of ints

MAX_CHACON_STAGE = 14


# --------------------------------------------------------------------------
# Integer matrix helpers
# --------------------------------------------------------------------------


def _as_matrix(m) -> Matrix:
    rows = tuple(tuple(int(v) for v in row) for row in m)
    if not rows or any(len(r) != len(rows) for r in rows):
        raise DomainError(f"matrix must be square and nonempty: {m!r}")
    return rows


def _det(m: Matrix) -> int:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    a = [[Fraction(v) for v in row] for row in m]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            for k in range(c, n):
                a[r][k] -= f * a[c][k]
    return int(det)


def _inverse_unimodular(m: Matrix) -> Matrix:
    n = len(m)
    if n == 2:
        d = _det(m)
        (a, b), (c, e) = m
        return ((d * e, -d * b), (-d * c, d * a))
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [v / p for v in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return tuple(tuple(int(v) for v in row[n:]) for row in a)


def _transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m))


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = _transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def _matvec(m: Matrix, v: Sequence[int]) -> tuple:
    if len(v) == 2:
        return (m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1])
    return tuple(sum(x * y for x, y in zip(row, v)) for row in m)


def _matpow(m: Matrix, k: int) -> Matrix:
    n = len(m)
    result: Matrix = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    base = m
    while k:
        if k & 1:
            result = _matmul(result, base)
        base = _matmul(base, base)
        k >>= 1
    return result


# --------------------------------------------------------------------------
# Systems
# --------------------------------------------------------------------------


class System:
    """Base class.  Concrete systems are frozen dataclasses."""

    kind = "abstract"

    @property
    def acts_on_intervals(self) -> bool:
        return False

    @property
    def torus_dim(self) -> int | None:
        """Lattice dimension of the trig polynomials this system acts on (None: any)."""
        raise UnsupportedError(f"{self.kind} does not act on trigonometric polynomials")

    def acts_on_trig(self, dim: int) -> bool:
        try:
            d = self.torus_dim
        except UnsupportedError:
            return False
        return d is None or d == dim

    def check_horizon(self, i: int) -> None:
        pass

    def transport_pieces(self, pieces: Iterable[Piece], i: int) -> list[Piece]:
        raise UnsupportedError(f"{self.kind} has no exact action on interval sets")

    def transport_mode(self, mode: tuple, i: int) -> tuple[tuple, Fraction]:
        """``T^i chi_mode = exp(2 pi i theta) chi_mode'``; returns ``(mode', theta)``."""
        raise UnsupportedError(f"{self.kind} does not act on trigonometric polynomials")

    def mode_stepper(self, k: int):
        """Callable ``mode -> (mode', theta)`` for ``T^k``, with per-call work kept small."""
        return lambda mode: self.transport_mode(mode, k)

    def cell_layout(self):
        """``(h, cell_of_level)`` when ``T`` permutes the cells ``[c/h, (c+1)/h)`` cyclically.

        ``cell_of_level[l]`` is the cell holding level ``l`` and ``T`` moves level
        ``l`` to level ``l + 1 mod h`` by translation.  None for other systems.
        """
        return None

    def to_json(self) -> dict:
        raise NotImplementedError


def _translate_pieces(pieces: Iterable[Piece], t: Fraction) -> list[Piece]:
    t -= math.floor(t)
    out = []
    for lo, hi, v in pieces:
        lo, hi = lo + t, hi + t
        if hi <= 1:
            out.append((lo, hi, v))
        elif lo >= 1:
            out.append((lo - 1, hi - 1, v))
        else:
            out.append((lo, Fraction(1), v))
            out.append((Fraction(0), hi - 1, v))
    return out


@dataclass(frozen=True)
class Identity(System):
    dim: int | None = None
    kind = "identity"

    @property
    def acts_on_intervals(self):
        return True

    @property
    def torus_dim(self):
        return self.dim

    def transport_pieces(self, pieces, i):
        return list(pieces)

    def transport_mode(self, mode, i):
        return tuple(mode), Fraction(0)

    def to_json(self):
        out = {"kind": "identity"}
        if self.dim is not None:
            out["dim"] = self.dim
        return out


@dataclass(frozen=True)
class CyclicShift(System):
    """``x -> x + 1/n`` on [0, 1): the shift on Z/n acting on cells of width 1/n."""

    n: int
    kind = "cyclic"

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("cyclic modulus must be positive")

    @property
    def acts_on_intervals(self):
        return True

    @property
    def torus_dim(self):
        return 1

    def transport_pieces(self, pieces, i):
        return _translate_pieces(pieces, Fraction(i, self.n))

    def transport_mode(self, mode, i):
        return tuple(mode), Fraction(-mode[0] * i, self.n)

    def cell_layout(self):
        return self.n, np.arange(self.n, dtype=np.int64)

    def to_json(self):
        return {"kind": "cyclic", "n": self.n}


@dataclass(frozen=True)
class Rotation(System):
    """``x -> x + alpha mod 1`` with exact rational ``alpha``."""

    alpha: Fraction
    kind = "rotation"

    def __post_init__(self):
        a = as_rational(self.alpha)
        if not 0 <= a < 1:
            raise DomainError(f"rotation angle {a} outside [0, 1)")
        object.__setattr__(self, "alpha", a)

    @property
    def acts_on_intervals(self):
        return True

    @property
    def torus_dim(self):
        return 1

    def transport_pieces(self, pieces, i):
        return _translate_pieces(pieces, i * self.alpha)

    def transport_mode(self, mode, i):
        return tuple(mode), -mode[0] * i * self.alpha

    def to_json(self):
        return {"kind": "rotation", "alpha": rational_pair(self.alpha)}


@dataclass(frozen=True)
class TorusAutomorphism(System):
    """``x -> M x mod Z^d`` for an integer matrix with ``|det M| = 1``."""

    matrix: Matrix
    kind = "cat"
    _inv_t: Matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if abs(_det(m)) != 1:
            raise DomainError(f"torus automorphism needs |det M| = 1, got det {_det(m)}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_inv_t", _transpose(_inverse_unimodular(m)))

    @property
    def torus_dim(self):
        return len(self.matrix)

    def lattice_matrix(self, i: int) -> Matrix:
        """Integer matrix sending ``a`` to the index of ``T^i chi_a``."""
        if i >= 0:
            return _matpow(self._inv_t, i)
        return _matpow(_transpose(self.matrix), -i)

    def transport_mode(self, mode, i):
        return _matvec(self.lattice_matrix(i), mode), Fraction(0)

    def mode_stepper(self, k):
        m = self.lattice_matrix(k)
        zero = Fraction(0)
        return lambda mode: (_matvec(m, mode), zero)

    def to_json(self):
        return {"kind": "cat", "matrix": [list(r) for r in self.matrix]}


CAT_MATRIX = ((2, 1), (1, 1))


def cat_map() -> TorusAutomorphism:
    return TorusAutomorphism(CAT_MATRIX)


@dataclass(frozen=True)
class Product(System):
    """``T_left x T_right`` acting on characters of the product torus."""

    left: System
    right: System
    kind = "product"

    def __post_init__(self):
        for part in (self.left, self.right):
            if part.torus_dim is None:
                raise DomainError("product factors need a definite torus dimension")

    @property
    def torus_dim(self):
        return self.left.torus_dim + self.right.torus_dim

    def transport_mode(self, mode, i):
        d = self.left.torus_dim
        ml, tl = self.left.transport_mode(tuple(mode[:d]), i)
        mr, tr = self.right.transport_mode(tuple(mode[d:]), i)
        return ml + mr, tl + tr

    def mode_stepper(self, k):
        d = self.left.torus_dim
        sl, sr = self.left.mode_stepper(k), self.right.mode_stepper(k)

        def step(mode):
            ml, tl = sl(tuple(mode[:d]))
            mr, tr = sr(tuple(mode[d:]))
            return tuple(ml) + tuple(mr), tl + tr

        return step

    def to_json(self):
        return {"kind": "product", "left": self.left.to_json(), "right": self.right.to_json()}


# --------------------------------------------------------------------------
# Chacon rank-one construction
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RankOneStage:
    """Stage ``n`` tower of the Chacon construction.

    Level ``k`` is ``[starts[k] * unit, (starts[k] + span) * unit)``.  The layout
    is normalised so that the stage-``terminal`` tower fills [0, 1) exactly with
    levels of width ``unit``.
    """

    stage: int
    terminal: int
    starts: np.ndarray
    span: int
    unit: Fraction

    @property
    def height(self) -> int:
        return len(self.starts)

    @property
    def width(self) -> Fraction:
        return self.span * self.unit

    def level(self, k: int) -> tuple[Fraction, Fraction]:
        s = int(self.starts[k])
        return s * self.unit, (s + self.span) * self.unit

    @property
    def levels(self) -> list[tuple[Fraction, Fraction]]:
        return [self.level(k) for k in range(self.height)]

    def union(self) -> IntervalSet:
        return normalize(self.levels)

    def level_set(self, ks: Iterable[int]) -> IntervalSet:
        return normalize(self.level(k) for k in ks)


def chacon_height(n: int) -> int:
    return (3 ** (n + 1) - 1) // 2


@lru_cache(maxsize=32)
def _chacon_starts(n: int, terminal: int) -> tuple[np.ndarray, int]:
    w = 3 ** terminal
    starts = np.zeros(1, dtype=np.int64)
    mass = w
    for _ in range(n):
        w //= 3
        starts = np.concatenate([starts, starts + w, np.array([mass], dtype=np.int64), starts + 2 * w])
        mass += w
    starts.flags.writeable = False
    return starts, w


def chacon_stage(n: int, terminal: int | None = None, max_stage: int = MAX_CHACON_STAGE) -> RankOneStage:
    """Chacon tower at stage ``n``: cut in three, one spacer over the middle column.

    Heights follow ``h_{n+1} = 3 h_n + 1``.  ``terminal`` (default ``n``) fixes the
    normalisation: the stage-``terminal`` tower covers [0, 1).
    """
    if terminal is None:
        terminal = n
    if n < 0:
        raise DomainError("stage must be nonnegative")
    if terminal < n:
        raise DomainError("terminal stage must be at least the requested stage")
    if terminal > max_stage:
        raise CostGuardError(f"stage {terminal} exceeds the configured maximum {max_stage}")
    starts, span = _chacon_starts(n, terminal)
    return RankOneStage(n, terminal, starts, span, Fraction(1, chacon_height(terminal)))


@dataclass(frozen=True)
class RankOneTower(System):
    """Chacon stage-``stage`` transformation on [0, 1).

    The stage tower fills [0, 1) with ``h`` levels of width ``1/h``; each level is
    translated onto the next and the top level closes up onto the bottom one.
    Iterates are accepted only while ``h > |i| + 1``, where this closed-up
    map agrees with the Chacon map on all levels an orbit segment starting at
    the bottom can reach.
    """

    stage: int
    max_stage: int = MAX_CHACON_STAGE
    kind = "chacon"

    def __post_init__(self):
        if not 0 <= self.stage <= self.max_stage:
            raise CostGuardError(f"stage {self.stage} outside 0..{self.max_stage}")

    @property
    def tower(self) -> RankOneStage:
        return chacon_stage(self.stage, max_stage=self.max_stage)

    @property
    def height(self) -> int:
        return chacon_height(self.stage)

    @property
    def acts_on_intervals(self):
        return True

    def check_horizon(self, i):
        if not self.height > abs(i) + 1:
            raise HorizonError(
                f"iterate {i} needs a tower taller than {abs(i) + 1}; stage {self.stage} has height "
                f"{self.height}")

    def cell_layout(self):
        return self.height, self.tower.starts

    def level_of_cell(self) -> np.ndarray:
        return _inverse_permutation(self.stage)

    def transport_pieces(self, pieces, i):
        self.check_horizon(i)
        h = self.height
        cell_of_level = self.tower.starts
        level_of_cell = self.level_of_cell()

        def target(c: int) -> int:
            return int(cell_of_level[(int(level_of_cell[c]) + i) % h])

        out: list[Piece] = []
        full_cells: list[np.ndarray] = []
        full_tags: list[np.ndarray] = []
        values: list = []
        for lo, hi, v in pieces:
            if lo >= hi:
                continue
            a, b = lo * h, hi * h
            ca, cb = math.floor(a), math.ceil(b)
            if cb - ca == 1:
                t = target(ca)
                shift = Fraction(t - ca, h)
                out.append((lo + shift, hi + shift, v))
                continue
            first_full = ca if a == ca else ca + 1
            last_full = cb if b == cb else cb - 1
            if first_full != ca:
                t = target(ca)
                shift = Fraction(t - ca, h)
                out.append((lo + shift, Fraction(t + 1, h), v))
            if last_full != cb:
                t = target(cb - 1)
                shift = Fraction(t - (cb - 1), h)
                out.append((Fraction(t, h), hi + shift, v))
            if last_full > first_full:
                cells = np.arange(first_full, last_full, dtype=np.int64)
                full_cells.append(cell_of_level[(level_of_cell[cells] + i) % h])
                full_tags.append(np.full(cells.size, len(values), dtype=np.int64))
                values.append(v)
        if full_cells:
            cells = np.concatenate(full_cells)
            tags = np.concatenate(full_tags)
            order = np.argsort(cells, kind="stable")
            cells, tags = cells[order], tags[order]
            breaks = np.nonzero((np.diff(cells) != 1) | (np.diff(tags) != 0))[0] + 1
            run_starts = np.concatenate([[0], breaks])
            run_ends = np.concatenate([breaks, [cells.size]])
            for s, e in zip(run_starts.tolist(), run_ends.tolist()):
                out.append((Fraction(int(cells[s]), h), Fraction(int(cells[e - 1]) + 1, h),
                            values[int(tags[s])]))
        return out

    def to_json(self):
        return {"kind": "chacon", "stage": self.stage}


@lru_cache(maxsize=8)
def _inverse_permutation(stage: int) -> np.ndarray:
    starts = chacon_stage(stage, max_stage=max(stage, MAX_CHACON_STAGE)).starts
    inv = np.empty_like(starts)
    inv[starts] = np.arange(starts.size, dtype=np.int64)
    inv.flags.writeable = False
    return inv


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def apply_set(sys: System, a: IntervalSet, i: int) -> IntervalSet:
    """Exact image ``T^i a``."""
    if not sys.acts_on_intervals:
        raise UnsupportedError(
            f"{sys.kind} images of interval sets are not interval sets; use trigonometric observables")
    sys.check_horizon(i)
    if i == 0:
        return a
    return normalize((lo, hi) for lo, hi, _ in sys.transport_pieces(((lo, hi, 1) for lo, hi in a), i))


def koopman_apply(sys: System, f: Observable, i: int) -> Observable:
    """``T^i f = f o T^{-i}``."""
    if isinstance(f, StepFunction):
        if not sys.acts_on_intervals:
            raise ClassMismatchError(f"{sys.kind} does not act on step functions")
        sys.check_horizon(i)
        if i == 0 or len(f.values) == 1:
            return f
        return StepFunction.from_pieces(sys.transport_pieces(f.pieces(), i))
    if isinstance(f, TrigPolynomial):
        if not sys.acts_on_trig(f.dim):
            raise ClassMismatchError(f"{sys.kind} does not act on trigonometric polynomials of dim {f.dim}")
        if i == 0:
            return f
        out = {}
        for mode, c in f.coefficients.items():
            new_mode, theta = sys.transport_mode(mode, i)
            out[tuple(new_mode)] = c.rotate(theta)
        return TrigPolynomial(f.dim, out, real=f.real)
    raise ClassMismatchError(f"not an observable: {type(f).__name__}")


def character_orbit(matrix, a: Sequence[int], i: int) -> tuple:
    """Lattice index of ``T^i chi_a`` for ``T x = M x``: ``((M^T)^{-1})^i a``."""
    return TorusAutomorphism(_as_matrix(matrix)).transport_mode(tuple(a), i)[0]


# --------------------------------------------------------------------------
# Serialisation
# --------------------------------------------------------------------------


def golden_approximant(min_bits: int = 128) -> Fraction:
    """``F_k / F_{k+1}`` with ``F_{k+1} >= 2**min_bits``: a rational stand-in for ``(sqrt 5 - 1)/2``."""
    p, q = 1, 1
    while q < (1 << min_bits):
        p, q = q, p + q
    return Fraction(p, q)


def system_from_json(data: dict) -> System:
    kind = data.get("kind")
    if kind == "identity":
        return Identity(data.get("dim"))
    if kind == "cyclic":
        return CyclicShift(int(data["n"]))
    if kind == "rotation":
        alpha = data["alpha"]
        if alpha == "golden":
            return Rotation(golden_approximant(int(data.get("bits", 128))))
        return Rotation(as_rational(alpha))
    if kind in ("cat", "torus"):
        return TorusAutomorphism(data.get("matrix", CAT_MATRIX))
    if kind == "chacon":
        return RankOneTower(int(data["stage"]))
    if kind == "product":
        return Product(system_from_json(data["left"]), system_from_json(data["right"]))
    raise DomainError(f"unknown system kind {kind!r}")


def system_to_json(sys: System) -> dict:
    return sys.to_json()

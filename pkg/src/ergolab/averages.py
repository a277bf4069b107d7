"""Cesaro multicorrelation engine.

Every series is a full-sequence average over ``i = 1..N`` reported at a list
of checkpoints ``N``.  Partial sums are kept between checkpoints, so a later
checkpoint reuses all the work done for the earlier ones.

Three evaluation routes share one contract:

* trigonometric polynomials -- exact lattice/phase transport of each term;
* step functions on interval systems -- exact :class:`~fractions.Fraction`
  arithmetic through :func:`~ergolab.systems.koopman_apply`;
* step functions aligned with the cells of a cell-permutation system (cyclic
  shift, Chacon tower) -- integer level arrays swept by compiled kernels.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ClassMismatchError, CostGuardError, DomainError, UnsupportedError
from .measure_algebra import (
    IntervalSet,
    Observable,
    PhaseSum,
    StepFunction,
    TrigPolynomial,
    as_rational,
    intersect,
    rational_pair,
    _sqrt,
)
from .systems import Rotation, System, apply_set, koopman_apply

STEP_BREAKPOINT_CAP = 10 ** 6
_INT64_SAFE = 1 << 62


def dyadic(lo: int = 7, hi: int = 20) -> tuple[int, ...]:
    return tuple(2 ** k for k in range(lo, hi + 1))


DEFAULT_SCHEDULE = dyadic()


def _schedule(schedule) -> tuple[int, ...]:
    if schedule is None:
        return DEFAULT_SCHEDULE
    if isinstance(schedule, int):
        schedule = (schedule,)
    sched = tuple(int(n) for n in schedule)
    if not sched:
        raise DomainError("schedule is empty")
    if sched[0] < 1 or any(b <= a for a, b in zip(sched, sched[1:])):
        raise DomainError(f"checkpoints must be positive and strictly increasing: {sched}")
    return sched


# --------------------------------------------------------------------------
# Result types
# --------------------------------------------------------------------------


def as_number(v) -> float | complex:
    """Float (or complex) view of an exact or numeric series value."""
    if isinstance(v, PhaseSum):
        r = v.as_rational()
        if r is not None:
            return float(r)
        z = complex(v)
        return z.real if z.imag == 0 else z
    if isinstance(v, Fraction):
        return float(v)
    return v


def magnitude(v) -> float:
    return abs(as_number(v))


@dataclass(frozen=True)
class AverageSeries:
    """Average values at increasing checkpoints.

    ``values`` are exact (Fraction or PhaseSum) when ``exact`` is set; norm-valued
    series store floats and keep the exact squared norms in ``squares`` when
    those are available.
    """

    checkpoints: tuple[int, ...]
    values: tuple
    descriptor: dict = field(default_factory=dict)
    exact: bool = False
    squares: tuple = ()

    def __post_init__(self):
        if len(self.checkpoints) != len(self.values):
            raise DomainError("one value per checkpoint")
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise DomainError("checkpoints must be strictly increasing")

    def __len__(self):
        return len(self.checkpoints)

    def __iter__(self):
        return iter(zip(self.checkpoints, self.values))

    def value_at(self, n: int):
        return self.values[self.checkpoints.index(n)]

    @property
    def last(self):
        return self.values[-1]

    def numbers(self) -> list:
        return [as_number(v) for v in self.values]

    def to_csv(self, path: str | os.PathLike | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["N", "value", "exact_num", "exact_den"])
        for n, v in self:
            exact = v if isinstance(v, Fraction) else (v.as_rational() if isinstance(v, PhaseSum) else None)
            num = as_number(v)
            text = repr(num) if not isinstance(num, complex) else f"{num.real!r}{num.imag:+}j"
            writer.writerow([n, text, "" if exact is None else exact.numerator,
                             "" if exact is None else exact.denominator])
        out = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(out)
        return out

    def to_plot_data(self, path: str | os.PathLike | None = None) -> str:
        lines = [f"{n} {magnitude(v)!r}" for n, v in self]
        out = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(out)
        return out


@dataclass(frozen=True)
class Certificate:
    """Positivity certificate ``lower_bound = (cube_integral - 3 eps) / L``."""

    epsilon: Fraction
    L: int
    cube_integral: Fraction
    lower_bound: Fraction
    return_bound: object
    system: dict
    set: dict

    def to_json(self) -> dict:
        return {
            "epsilon": rational_pair(self.epsilon),
            "L": self.L,
            "cube_integral": rational_pair(self.cube_integral),
            "lower_bound": rational_pair(self.lower_bound),
            "lower_bound_float": float(self.lower_bound),
            "return_bound": self.return_bound.to_json(),
            "system": self.system,
            "set": self.set,
        }


# --------------------------------------------------------------------------
# Routing
# --------------------------------------------------------------------------


def observable_class(fs: Sequence[Observable]):
    if not fs:
        raise DomainError("no observables given")
    cls = type(fs[0])
    if cls not in (StepFunction, TrigPolynomial):
        raise ClassMismatchError(f"not an observable: {cls.__name__}")
    for f in fs[1:]:
        if type(f) is not cls:
            raise ClassMismatchError(f"mixed observable classes: {cls.__name__} and {type(f).__name__}")
        if cls is TrigPolynomial and f.dim != fs[0].dim:
            raise ClassMismatchError("trigonometric polynomials on tori of different dimension")
    return cls


def _route(sys: System, fs: Sequence[Observable]) -> str:
    cls = observable_class(fs)
    if cls is TrigPolynomial:
        if not sys.acts_on_trig(fs[0].dim):
            raise ClassMismatchError(f"{sys.kind} does not act on trigonometric polynomials of dim {fs[0].dim}")
        return "trig"
    if not sys.acts_on_intervals:
        raise ClassMismatchError(f"{sys.kind} does not act on step functions")
    layout = sys.cell_layout()
    if layout is not None and all(_aligned(f, layout[0]) for f in fs):
        return "cell"
    return "step"


def _aligned(f: StepFunction, h: int) -> bool:
    return all((b * h).denominator == 1 for b in f.breakpoints)


def _segment_of(schedule, i0, i1):
    """Yield ``(j, lo, hi)``: the part of ``[i0, i1]`` inside segment ``j``."""
    prev = 0
    for j, n in enumerate(schedule):
        lo, hi = max(i0, prev + 1), min(i1, n)
        if lo <= hi:
            yield j, lo, hi
        prev = n


def _chunked(fn, args, n_max: int, workers: int):
    workers = max(1, int(workers))
    if workers == 1 or n_max < 2 * workers:
        return [fn(*args, 1, n_max)]
    edges = np.linspace(0, n_max, workers + 1).astype(int)
    ranges = [(int(a) + 1, int(b)) for a, b in zip(edges, edges[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futures]


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("ERGOLAB_WORKERS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# Trigonometric route
# --------------------------------------------------------------------------


def _transported_terms(sys, f: TrigPolynomial, k: int, start: int):
    terms = []
    for mode, c in f.coefficients.items():
        m, theta = sys.transport_mode(mode, k * start)
        terms.append([tuple(m), c.rotate(theta)])
    return terms


def _add_modes(a, b):
    if len(a) == 2:
        return (a[0] + b[0], a[1] + b[1])
    return tuple(x + y for x, y in zip(a, b))


def _product_terms(term_lists):
    """Cartesian product of factor terms: ``[(mode_sum, coef_product), ...]``."""
    acc = [(tuple(term_lists[0][0][0]), term_lists[0][0][1])] if len(term_lists[0]) == 1 else \
        [(tuple(m), c) for m, c in term_lists[0]]
    for terms in term_lists[1:]:
        if len(terms) == 1:
            (m2, c2), = terms
            acc = [(_add_modes(m, m2), c * c2) for m, c in acc]
        else:
            acc = [(_add_modes(m, m2), c * c2) for m, c in acc for m2, c2 in terms]
    return acc


def _step_terms(term_lists, steppers):
    for terms, step in zip(term_lists, steppers):
        for t in terms:
            m, theta = step(t[0])
            t[0] = tuple(m)
            if theta:
                t[1] = t[1].rotate(theta)


def _trig_partials(sys, factors, f0, schedule, kind, i0, i1):
    """Per-segment partial sums over ``i0..i1``.

    ``kind == "scalar"``: sums of ``integrate(f0 * prod_p T^{p i} f_p)``;
    ``kind == "function"``: sparse dicts ``mode -> coefficient`` of
    ``sum_i prod_p T^{p i} f_p``.
    """
    term_lists = [_transported_terms(sys, f, p, i0) for p, f in enumerate(factors, start=1)]
    steppers = [sys.mode_stepper(p) for p in range(1, len(factors) + 1)]
    if kind == "scalar":
        f0neg = {tuple(-v for v in m): c for m, c in f0.coefficients.items()}
    partials: list = [PhaseSum.gaussian(0) if kind == "scalar" else {} for _ in schedule]
    for j, lo, hi in _segment_of(schedule, i0, i1):
        total = partials[j]
        for _ in range(lo, hi + 1):
            if all(term_lists):
                prods = _product_terms(term_lists)
                if kind == "scalar":
                    for mode, c in prods:
                        w = f0neg.get(mode)
                        if w is not None:
                            total = total + w * c
                else:
                    for mode, c in prods:
                        prev = total.get(mode)
                        total[mode] = c if prev is None else prev + c
            _step_terms(term_lists, steppers)
        partials[j] = total
    return partials


def _merge_dicts(dicts):
    out: dict = {}
    for d in dicts:
        for mode, c in d.items():
            prev = out.get(mode)
            out[mode] = c if prev is None else prev + c
    return out


def _trig_norm2(S: dict, n: int, target: PhaseSum, dim: int):
    zero = (0,) * dim
    total: Fraction | float = Fraction(0)
    exact = True
    for mode, c in S.items():
        if mode == zero:
            continue
        a = c.abs2()
        exact = exact and isinstance(a, Fraction)
        total = total + a
    total = total / (n * n)
    centre = S.get(zero, PhaseSum.gaussian(0)) * Fraction(1, n) - target
    a = centre.abs2()
    exact = exact and isinstance(a, Fraction)
    return total + a, exact


# --------------------------------------------------------------------------
# Exact step-function route
# --------------------------------------------------------------------------


def _step_product(sys, factors, i):
    prod = None
    for p, f in enumerate(factors, start=1):
        g = koopman_apply(sys, f, p * i)
        prod = g if prod is None else prod * g
    return prod


def _step_partials(sys, factors, f0, schedule, kind, i0, i1):
    partials: list = [Fraction(0) if kind == "scalar" else StepFunction.constant(0) for _ in schedule]
    for j, lo, hi in _segment_of(schedule, i0, i1):
        total = partials[j]
        for i in range(lo, hi + 1):
            prod = _step_product(sys, factors, i)
            if kind == "scalar":
                total += (f0 * prod).integral()
            else:
                total = total + prod
                if len(total.breakpoints) > STEP_BREAKPOINT_CAP:
                    raise CostGuardError(
                        f"partial sum has more than {STEP_BREAKPOINT_CAP} breakpoints at i={i}")
        partials[j] = total
    return partials


def _set_partials(sys, a, schedule, i0, i1):
    partials = [Fraction(0) for _ in schedule]
    for j, lo, hi in _segment_of(schedule, i0, i1):
        total = Fraction(0)
        for i in range(lo, hi + 1):
            total += intersect(intersect(a, apply_set(sys, a, i)), apply_set(sys, a, 2 * i)).measure
        partials[j] = total
    return partials


# --------------------------------------------------------------------------
# Cell-permutation route
# --------------------------------------------------------------------------


def level_array(f: StepFunction, h: int, cell_of_level: np.ndarray) -> tuple[np.ndarray, int]:
    """Integer level values ``F`` and scale ``D`` with ``f = F / D`` on each level."""
    den = math.lcm(*(v.denominator for v in f.values))
    ints = [int(v * den) for v in f.values]
    if max(abs(v) for v in ints) >= _INT64_SAFE:
        raise CostGuardError("step function values too large for the cell kernels")
    cuts = [int(b * h) for b in f.breakpoints] + [h]
    counts = np.diff(np.array(cuts, dtype=np.int64))
    cells = np.repeat(np.array(ints, dtype=np.int64), counts)
    return cells[cell_of_level], den


class _CellSweep:
    """Running ``acc[l] = sum_{i <= n} prod_p F_p[l - p i]`` for one set of factors."""

    def __init__(self, sys: System, factors: Sequence[StepFunction], n_max: int):
        sys.check_horizon(len(factors) * n_max)
        self.h, cell_of_level = sys.cell_layout()
        arrays, dens = zip(*(level_array(f, self.h, cell_of_level) for f in factors))
        self.den = math.prod(dens)
        bound = n_max
        for a in arrays:
            bound *= max(1, int(np.abs(a).max()))
        self.exact = bound < _INT64_SAFE
        dtype = np.int64 if self.exact else np.float64
        self.F = np.ascontiguousarray(np.stack(arrays).astype(dtype))
        self.acc = np.zeros(self.h, dtype=dtype)
        self.n = 0
        nnz = [int(np.count_nonzero(a)) for a in arrays]
        self.driver = int(np.argmin(nnz))
        self.sparse = nnz[self.driver] < self.h // 3
        if self.sparse:
            self.nzpos = np.nonzero(self.F[self.driver])[0].astype(np.int64)
            self.nzval = self.F[self.driver][self.nzpos]

    def advance(self, n: int) -> None:
        if n <= self.n:
            return
        if self.sparse:
            _kernels.accumulate_sparse(self.nzpos, self.nzval, self.driver, self.F, self.h,
                                       self.n + 1, n, self.acc)
        else:
            _kernels.accumulate_dense(self.F, self.h, self.n + 1, n, self.acc)
        self.n = n

    def scalar(self, F0: np.ndarray, den0: int):
        if self.exact:
            s = _exact_dot(F0, self.acc)
            return Fraction(s, self.n * self.h * den0 * self.den)
        return float(np.dot(F0.astype(np.float64), self.acc)) / (self.n * self.h * den0 * self.den)

    def norm2(self, target: Fraction):
        # (1/h) sum_l (acc_l / (n D) - c)^2 with c = cn / cd
        if self.exact:
            cn, cd = target.numerator, target.denominator
            k = self.n * self.den * cn
            s1 = _exact_dot(self.acc, self.acc)
            s2 = int(self.acc.sum(dtype=np.int64)) if self.n * self.h < _INT64_SAFE else \
                sum(int(v) for v in self.acc)
            num = cd * cd * s1 - 2 * cd * k * s2 + self.h * k * k
            return Fraction(num, self.h * (self.n * self.den * cd) ** 2)
        g = self.acc / (self.n * self.den) - float(target)
        return float(np.dot(g, g)) / self.h


def _exact_dot(a: np.ndarray, b: np.ndarray) -> int:
    amax = int(np.abs(a).max()) if a.size else 0
    bmax = int(np.abs(b).max()) if b.size else 0
    if amax * bmax * a.size < _INT64_SAFE:
        return int(np.dot(a, b))
    return sum(int(x) * int(y) for x, y in zip(a.tolist(), b.tolist()))


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------


def _descriptor(op, sys, fs, route, **extra):
    d = {"operation": op, "system": sys.to_json(), "route": route, "m": len(fs) - (op == "scalar")}
    d.update(extra)
    return d


def _integral_product(fs):
    out = None
    for f in fs:
        v = f.integral()
        v = PhaseSum.coerce(v) if isinstance(f, TrigPolynomial) else v
        out = v if out is None else out * v
    return out


def _finalize_scalar(values, route):
    if route == "trig":
        return tuple(v.as_rational() if v.as_rational() is not None else v for v in values)
    return tuple(values)


def scalar_multicorrelation(sys: System, fs: Sequence[Observable], schedule=None, *,
                            workers: int = 1) -> AverageSeries:
    """``(1/N) sum_{i=1}^N integrate(f_0 * prod_{p=1}^m T^{p i} f_p)`` at each checkpoint."""
    fs = list(fs)
    if len(fs) < 2:
        raise DomainError("need f_0 and at least one iterated observable")
    sched = _schedule(schedule)
    route = _route(sys, fs)
    f0, factors = fs[0], fs[1:]
    n_max = sched[-1]
    if route == "cell":
        sweep = _CellSweep(sys, factors, n_max)
        F0, den0 = level_array(f0, sweep.h, sys.cell_layout()[1])
        values = []
        for n in sched:
            sweep.advance(n)
            values.append(sweep.scalar(F0, den0))
        return AverageSeries(sched, tuple(values), _descriptor("scalar", sys, fs, route), exact=sweep.exact)
    sys.check_horizon(len(factors) * n_max)
    fn = _trig_partials if route == "trig" else _step_partials
    chunks = _chunked(fn, (sys, factors, f0, sched, "scalar"), n_max, workers)
    values = []
    running = PhaseSum.gaussian(0) if route == "trig" else Fraction(0)
    for j, n in enumerate(sched):
        for part in chunks:
            running = running + part[j]
        values.append(running * Fraction(1, n) if route == "trig" else running / n)
    return AverageSeries(sched, _finalize_scalar(values, route), _descriptor("scalar", sys, fs, route),
                         exact=True)


def l2_multicorrelation_defect(sys: System, fs: Sequence[Observable], schedule=None, *,
                               workers: int = 1) -> AverageSeries:
    """``|| (1/N) sum_{i=1}^N prod_{p=1}^m T^{p i} f_p - prod_p integrate(f_p) ||_2``."""
    fs = list(fs)
    if len(fs) < 2:
        raise DomainError("the L2 multicorrelation needs m >= 2 observables")
    sched = _schedule(schedule)
    route = _route(sys, fs)
    target = _integral_product(fs)
    n_max = sched[-1]
    squares = []
    exact = True
    if route == "cell":
        sweep = _CellSweep(sys, fs, n_max)
        for n in sched:
            sweep.advance(n)
            squares.append(sweep.norm2(target))
        exact = sweep.exact
    else:
        sys.check_horizon(len(fs) * n_max)
        fn = _trig_partials if route == "trig" else _step_partials
        chunks = _chunked(fn, (sys, fs, None, sched, "function"), n_max, workers)
        if route == "trig":
            running: dict = {}
            for j, n in enumerate(sched):
                running = _merge_dicts([running] + [part[j] for part in chunks])
                sq, ok = _trig_norm2(running, n, target, fs[0].dim)
                exact = exact and ok
                squares.append(sq)
        else:
            running_f = StepFunction.constant(0)
            for j, n in enumerate(sched):
                for part in chunks:
                    running_f = running_f + part[j]
                squares.append((running_f * Fraction(1, n) - target).l2_squared())
    values = tuple(_sqrt(s) if isinstance(s, Fraction) else math.sqrt(max(s, 0.0)) for s in squares)
    return AverageSeries(sched, values, _descriptor("l2", sys, fs, route), exact=False,
                         squares=tuple(squares) if exact else ())


def roth_average(sys: System, a: IntervalSet, schedule=None, *, workers: int = 1) -> AverageSeries:
    """``(1/N) sum_{i=1}^N mu(a & T^i a & T^{2i} a)`` at each checkpoint (exact)."""
    sched = _schedule(schedule)
    chi = StepFunction.indicator(a)
    layout = sys.cell_layout()
    if layout is not None and _aligned(chi, layout[0]):
        series = scalar_multicorrelation(sys, [chi, chi, chi], sched)
        return AverageSeries(series.checkpoints, series.values,
                             {"operation": "roth", "system": sys.to_json(), "set": a.to_json(),
                              "route": "cell"}, exact=series.exact)
    if not sys.acts_on_intervals:
        raise UnsupportedError(f"{sys.kind} has no exact set action")
    sys.check_horizon(2 * sched[-1])
    chunks = _chunked(_set_partials, (sys, a, sched), sched[-1], workers)
    values = []
    running = Fraction(0)
    for j, n in enumerate(sched):
        for part in chunks:
            running += part[j]
        values.append(running / n)
    return AverageSeries(sched, tuple(values),
                         {"operation": "roth", "system": sys.to_json(), "set": a.to_json(), "route": "set"},
                         exact=True)


def positivity_certificate(sys: System, a: IntervalSet, epsilon) -> Certificate:
    """Lower bound for the Roth liminf of a rotation from a syndetic return bound.

    For a rotation every character is an eigenfunction, so the Kronecker
    projection fixes ``chi_A`` and ``int (P chi_A)^3 = mu(A)``.  If ``A`` has
    ``k`` components on the circle, ``||T^i chi_A - chi_A||^2 <= 2 k ||i alpha||``,
    so returns with ``||i alpha|| < eps^2 / (2k)`` put ``T^i chi_A`` within
    ``eps`` of ``chi_A``; each such ``i`` contributes at least ``mu(A) - 3 eps``
    and one occurs in every window of ``L`` consecutive integers.
    """
    from .spectral import ReturnBound, syndetic_return_bound

    if not isinstance(sys, Rotation):
        raise UnsupportedError("positivity certificates are built for rotations only")
    eps = as_rational(epsilon)
    if eps <= 0:
        raise DomainError("epsilon must be positive")
    chi = StepFunction.indicator(a)
    cube = (chi * chi * chi).integral()
    if cube - 3 * eps <= 0:
        raise DomainError(f"epsilon {eps} too large: mu(A) - 3 eps = {cube - 3 * eps} is not positive")
    k = a.circle_components()
    if k == 0:
        rb = ReturnBound(sys.alpha, None, 1, "invariant-set", 0)
    else:
        rb = syndetic_return_bound(sys.alpha, eps * eps / (2 * k))
    return Certificate(eps, rb.L, cube, (cube - 3 * eps) / rb.L, rb, sys.to_json(), a.to_json())

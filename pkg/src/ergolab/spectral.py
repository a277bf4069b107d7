"""Koopman spectral analysis on truncated bases.

Bases:

* rotations and cyclic shifts -- Fourier modes ``-K..K``;
* torus automorphisms -- the lattice window ``[-K, K]^d``; characters that
  leave the window are dropped and counted as truncation loss;
* products -- tensor products of the factor windows;
* Chacon towers -- normalised indicators of the stage-``K`` levels plus the
  complement of the stage-``K`` tower, with the Koopman operator compressed
  onto their span.

A compression of a unitary operator has a unit-modulus eigenvalue only on
genuine eigenfunctions lying inside the subspace, so the projector onto the
unit-modulus eigenvectors is the Kronecker projection restricted to the basis.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as _cartesian

import numpy as np

from .averages import AverageSeries, _aligned, _schedule, level_array
from .errors import ClassMismatchError, DomainError, UnsupportedError, VerificationError
from .measure_algebra import Observable, PhaseSum, StepFunction, TrigPolynomial, as_rational, rational_pair
from .systems import (
    CyclicShift,
    Identity,
    Product,
    RankOneTower,
    Rotation,
    System,
    TorusAutomorphism,
    koopman_apply,
)

UNIT_TOL = 1e-8
DEFAULT_CUTOFF = 64


# --------------------------------------------------------------------------
# Continued fractions and return times
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuedFraction:
    quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]


def continued_fraction(alpha, depth: int | None = None) -> ContinuedFraction:
    """Euclidean expansion ``alpha = [a_0; a_1, ...]`` with convergents ``p_k / q_k``."""
    a = as_rational(alpha)
    if not 0 <= a < 1:
        raise DomainError(f"alpha={a} outside [0, 1)")
    p, q = a.numerator, a.denominator
    quotients, convergents = [], []
    p1, p2, q1, q2 = 1, 0, 0, 1
    while q and (depth is None or len(quotients) < depth):
        t = p // q
        quotients.append(t)
        p1, p2 = t * p1 + p2, p1
        q1, q2 = t * q1 + q2, q1
        convergents.append((p1, q1))
        p, q = q, p - t * q
    return ContinuedFraction(tuple(quotients), tuple(convergents))


@dataclass(frozen=True)
class ReturnBound:
    """Every window ``{n+1, ..., n+L}`` contains ``i`` with ``||i alpha|| < delta``."""

    alpha: Fraction
    delta: Fraction | None
    L: int
    method: str
    verified_range: int

    def to_json(self) -> dict:
        return {"alpha": rational_pair(self.alpha),
                "delta": None if self.delta is None else rational_pair(self.delta),
                "L": self.L, "method": self.method, "verified_range": self.verified_range}


def _returns(alpha: Fraction, delta: Fraction, stop: int):
    """Yield ``i`` in ``1..stop`` with ``||i alpha|| < delta`` (integer arithmetic only)."""
    p, q = alpha.numerator, alpha.denominator
    dn, dd = delta.numerator, delta.denominator
    r = 0
    for i in range(1, stop + 1):
        r += p
        if r >= q:
            r -= q
        if min(r, q - r) * dd < dn * q:
            yield i


def windows_hold(alpha: Fraction, delta: Fraction, L: int, n_max: int) -> bool:
    """True when every window ``{n+1..n+L}``, ``0 <= n <= n_max``, contains a return."""
    last = 0
    for i in _returns(alpha, delta, n_max + L):
        if i - last > L:
            return False
        last = i
        if last > n_max:
            return True
    return last > n_max


def max_return_gap(alpha: Fraction, delta: Fraction, horizon: int) -> int:
    """Largest gap between consecutive returns in ``0..horizon`` (0 counts as a return)."""
    last, gap = 0, 0
    for i in _returns(alpha, delta, horizon):
        gap = max(gap, i - last)
        last = i
    return max(gap, horizon + 1 - last) if last < horizon else gap


def syndetic_return_bound(alpha, delta, *, method: str = "continued-fraction",
                          scan_factor: int = 10, horizon: int = 10 ** 5) -> ReturnBound:
    """Gap bound ``L`` for the return times ``{i : ||i alpha|| < delta}``.

    With the first convergent satisfying ``|q_k alpha - p_k| < delta`` the bound is
    ``L = q_k + q_{k+1}`` (``q_{k+1} = 0`` past the last convergent): the points
    ``{i alpha}`` over any ``q_k + q_{k+1}`` consecutive integers leave no gap
    longer than ``|q_k alpha - p_k|``.  The window property is then checked by a
    direct scan over ``n <= scan_factor * L``.  ``method="brute-scan"`` takes the
    maximal observed gap up to ``horizon`` instead.
    """
    a, d = as_rational(alpha), as_rational(delta)
    if not 0 < d < Fraction(1, 2):
        raise DomainError(f"delta={d} outside (0, 1/2)")
    if not 0 <= a < 1:
        raise DomainError(f"alpha={a} outside [0, 1)")
    if method == "continued-fraction":
        conv = continued_fraction(a).convergents
        k = next(j for j, (p, q) in enumerate(conv) if abs(q * a - p) < d)
        L = conv[k][1] + (conv[k + 1][1] if k + 1 < len(conv) else 0)
    elif method == "brute-scan":
        L = max_return_gap(a, d, horizon)
    else:
        raise DomainError(f"unknown method {method!r}")
    verified = scan_factor * L
    if not windows_hold(a, d, L, verified):
        raise VerificationError(f"return bound L={L} fails the window scan for alpha={a}, delta={d}")
    return ReturnBound(a, d, L, method, verified)


# --------------------------------------------------------------------------
# Koopman matrices
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KoopmanMatrix:
    """Matrix of ``f -> T f`` on a truncated orthonormal basis (column ``k`` is ``T e_k``)."""

    matrix: np.ndarray
    basis: tuple
    loss: int
    kind: str


def _window(cutoff: int, dim: int):
    r = range(-cutoff, cutoff + 1)
    return tuple(_cartesian(r, repeat=dim))


def _lattice_matrix(sys: System, cutoff: int, dim: int) -> KoopmanMatrix:
    basis = _window(cutoff, dim)
    index = {m: k for k, m in enumerate(basis)}
    n = len(basis)
    mat = np.zeros((n, n), dtype=complex)
    loss = 0
    for k, mode in enumerate(basis):
        image, theta = sys.transport_mode(mode, 1)
        row = index.get(tuple(image))
        if row is None:
            loss += 1
            continue
        mat[row, k] = complex(PhaseSum.phase(theta)) if theta else 1.0
    return KoopmanMatrix(mat, basis, loss, "fourier")


def _tower_labels(stage: int, basis_stage: int) -> np.ndarray:
    labels = np.arange((3 ** (basis_stage + 1) - 1) // 2, dtype=np.int64)
    for _ in range(stage - basis_stage):
        labels = np.concatenate([labels, labels, np.array([-1]), labels])
    return labels


def _tower_matrix(sys: RankOneTower, cutoff: int) -> KoopmanMatrix:
    k_stage = min(cutoff, sys.stage)
    labels = _tower_labels(sys.stage, k_stage)
    nb = (3 ** (k_stage + 1) - 1) // 2
    labels = np.where(labels < 0, nb, labels)
    counts = np.zeros((nb + 1, nb + 1), dtype=np.int64)
    np.add.at(counts, (np.roll(labels, -1), labels), 1)
    mass = np.bincount(labels, minlength=nb + 1).astype(float)
    keep = mass > 0
    counts, mass = counts[np.ix_(keep, keep)], mass[keep]
    mat = counts / np.sqrt(np.outer(mass, mass))
    basis = tuple(f"level{j}" for j in range(nb)) + (("rest",) if keep[-1] else ())
    return KoopmanMatrix(mat.astype(complex), basis, 0, "tower")


def koopman_matrix(sys: System, cutoff: int = DEFAULT_CUTOFF) -> KoopmanMatrix:
    """Finite realization of the Koopman operator of ``sys``."""
    if cutoff <= 0:
        raise DomainError("cutoff must be positive")
    if isinstance(sys, RankOneTower):
        return _tower_matrix(sys, cutoff)
    if isinstance(sys, Identity) and sys.dim is None:
        sys = Identity(1)
    if isinstance(sys, (Rotation, CyclicShift, TorusAutomorphism, Product, Identity)):
        return _lattice_matrix(sys, cutoff, sys.torus_dim)
    raise UnsupportedError(f"no Koopman matrix for {sys.kind}")


# --------------------------------------------------------------------------
# Kronecker projector
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KroneckerProjector:
    """Orthogonal projector onto the span of unit-modulus Koopman eigenvectors."""

    basis: tuple
    matrix: np.ndarray
    eigenvalues: np.ndarray
    unit_flags: np.ndarray
    eigenvectors: np.ndarray
    kind: str

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))

    def idempotence_error(self) -> float:
        return float(np.linalg.norm(self.matrix @ self.matrix - self.matrix, 2))

    def adjointness_error(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T, 2))

    def fixed_point_error(self) -> float:
        """``max ||P v - v||`` over the selected unit-modulus eigenvectors."""
        vs = self.eigenvectors[:, self.unit_flags]
        if vs.size == 0:
            return 0.0
        vs = vs / np.linalg.norm(vs, axis=0)
        return float(np.max(np.linalg.norm(self.matrix @ vs - vs, axis=0)))

    def vector(self, f: TrigPolynomial) -> np.ndarray:
        index = {m: k for k, m in enumerate(self.basis)}
        v = np.zeros(len(self.basis), dtype=complex)
        for mode, c in f.coefficients.items():
            if mode not in index:
                raise DomainError(f"mode {mode} lies outside the projector window")
            v[index[mode]] = complex(c)
        return v

    def constant_vector(self) -> np.ndarray:
        """Coordinates of the constant function 1 in this basis."""
        if self.kind == "fourier":
            return self.vector(TrigPolynomial.constant(1, len(self.basis[0])))
        raise UnsupportedError("use KroneckerProjector.weights for tower bases")

    def project(self, f: TrigPolynomial) -> dict:
        """``P f`` as a mapping mode -> complex coefficient (entries below 1e-12 dropped)."""
        w = self.matrix @ self.vector(f)
        return {m: w[k] for k, m in enumerate(self.basis) if abs(w[k]) > 1e-12}

    def eigen_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["re", "im", "modulus", "unit_flag"])
        for lam, flag in zip(self.eigenvalues, self.unit_flags):
            writer.writerow([repr(float(lam.real)), repr(float(lam.imag)), repr(float(abs(lam))), int(flag)])
        return buf.getvalue()


def kronecker_projector(sys: System, cutoff: int = DEFAULT_CUTOFF, tol: float = UNIT_TOL) -> KroneckerProjector:
    km = koopman_matrix(sys, cutoff)
    try:
        w, v = np.linalg.eig(km.matrix)
    except np.linalg.LinAlgError as exc:
        raise VerificationError(f"eigenvalue solver failed for {sys.kind}: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise VerificationError(f"eigenvalue solver returned non-finite output for {sys.kind}")
    flags = np.abs(np.abs(w) - 1.0) <= tol
    n = km.matrix.shape[0]
    if flags.any():
        u, s, _ = np.linalg.svd(v[:, flags], full_matrices=False)
        rank = int(np.sum(s > s[0] * 1e-10))
        q = u[:, :rank]
        p = q @ q.conj().T
    else:
        p = np.zeros((n, n), dtype=complex)
    return KroneckerProjector(km.basis, p, w, flags, v, km.kind)


def tower_weights(sys: RankOneTower, cutoff: int) -> np.ndarray:
    """Square roots of the basis masses; the constant 1 has these coordinates in the tower basis."""
    k_stage = min(cutoff, sys.stage)
    labels = _tower_labels(sys.stage, k_stage)
    nb = (3 ** (k_stage + 1) - 1) // 2
    labels = np.where(labels < 0, nb, labels)
    mass = np.bincount(labels, minlength=nb + 1) / labels.size
    return np.sqrt(mass[mass > 0])


# --------------------------------------------------------------------------
# Weak-mixing defect
# --------------------------------------------------------------------------


def _correlation_target(f, g):
    a, b = f.integral(), g.integral()
    if isinstance(f, TrigPolynomial):
        return PhaseSum.coerce(a) * PhaseSum.coerce(b).conjugate()
    return a * b


def weak_mixing_defect(sys: System, f: Observable, g: Observable, schedule=None) -> AverageSeries:
    """``D_N = (1/N) sum_{i=1}^N |<T^i f, g> - int f conj(int g)|^2``."""
    if type(f) is not type(g):
        raise ClassMismatchError(f"mixed observable classes {type(f).__name__} / {type(g).__name__}")
    sched = _schedule(schedule)
    n_max = sched[-1]
    target = _correlation_target(f, g)
    if isinstance(f, TrigPolynomial):
        if f.dim != g.dim or not sys.acts_on_trig(f.dim):
            raise ClassMismatchError(f"{sys.kind} does not act on these trigonometric polynomials")
        terms = [[m, c] for m, c in f.coefficients.items()]
        gconj = {m: c.conjugate() for m, c in g.coefficients.items()}
        step = sys.mode_stepper(1)
        values, total, exact = [], Fraction(0), True
        j = 0
        for i in range(1, n_max + 1):
            for t in terms:
                m, theta = step(t[0])
                t[0] = tuple(m)
                if theta:
                    t[1] = t[1].rotate(theta)
            corr = PhaseSum.gaussian(0)
            for m, c in terms:
                w = gconj.get(m)
                if w is not None:
                    corr = corr + c * w
            a = (corr - target).abs2()
            exact = exact and isinstance(a, Fraction)
            total = total + a
            if i == sched[j]:
                values.append(total / i)
                j += 1
        return AverageSeries(sched, tuple(values), {"operation": "weak_mixing_defect", "system": sys.to_json()},
                             exact=exact)
    if not isinstance(f, StepFunction) or not sys.acts_on_intervals:
        raise ClassMismatchError(f"{sys.kind} does not act on {type(f).__name__}")
    sys.check_horizon(n_max)
    layout = sys.cell_layout()
    if layout is not None and _aligned(f, layout[0]) and _aligned(g, layout[0]):
        return _cell_weak_mixing(sys, f, g, sched, target)
    values, total, j = [], Fraction(0), 0
    for i in range(1, n_max + 1):
        c = (koopman_apply(sys, f, i) * g).integral() - target
        total += c * c
        if i == sched[j]:
            values.append(total / i)
            j += 1
    return AverageSeries(sched, tuple(values), {"operation": "weak_mixing_defect", "system": sys.to_json()},
                         exact=True)


def _cell_weak_mixing(sys, f, g, sched, target: Fraction) -> AverageSeries:
    h, cell_of_level = sys.cell_layout()
    F, df = level_array(f, h, cell_of_level)
    G, dg = level_array(g, h, cell_of_level)
    n_max = sched[-1]
    # corr[i] = sum_l F[l - i] G[l]
    raw = np.fft.irfft(np.conj(np.fft.rfft(F.astype(float))) * np.fft.rfft(G.astype(float)), n=h)
    corr = raw[1:n_max + 1]
    ints = np.rint(corr)
    # roundoff of the FFT correlation is ~ eps * log2(h) * |F|_2 |G|_2
    exact = (float(np.linalg.norm(F.astype(float)) * np.linalg.norm(G.astype(float))) < 2.0 ** 40
             and float(np.max(np.abs(corr - ints), initial=0.0)) < 0.25)
    if exact:
        ints = ints.astype(np.int64)
        # c_i = ints / (h df dg) - target;  |c_i|^2 scaled by (h df dg td)^2
        tn, td = target.numerator, target.denominator
        scale = h * df * dg
        diffs = [int(v) * td - tn * scale for v in ints.tolist()]
        values, total, j = [], 0, 0
        for i, d in enumerate(diffs, start=1):
            total += d * d
            if i == sched[j]:
                values.append(Fraction(total, i * (scale * td) ** 2))
                j += 1
        return AverageSeries(sched, tuple(values),
                             {"operation": "weak_mixing_defect", "system": sys.to_json(), "route": "cell"},
                             exact=True)
    c = corr / (h * df * dg) - float(target)
    cums = np.cumsum(c * c)
    values = tuple(float(cums[n - 1]) / n for n in sched)
    return AverageSeries(sched, values, {"operation": "weak_mixing_defect", "system": sys.to_json(),
                                         "route": "cell"}, exact=False)

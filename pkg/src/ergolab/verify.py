"""Acceptance checks with independent oracles.

Each ``criterion_k`` function runs one acceptance criterion and returns a
:class:`CriterionReport` listing its individual checks with measured values.
Oracles are computed here from first principles (forward lattice powers,
brute-force progression counts, integer gap scans, closed-form integrals) and
never through the code path under test.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .averages import (
    dyadic,
    l2_multicorrelation_defect,
    positivity_certificate,
    roth_average,
    scalar_multicorrelation,
)
from .correspondence import DensitySet, count_3aps, cyclic_roth_average
from .errors import VerificationError
from .joinings import (
    defect_bound,
    empirical_joining_6,
    invariance_defect,
    within_bound,
)
from .measure_algebra import IntervalSet, StepFunction, TrigPolynomial, l2_norm, normalize
from .spectral import kronecker_projector, syndetic_return_bound, tower_weights, weak_mixing_defect, windows_hold
from .systems import (
    CAT_MATRIX,
    CyclicShift,
    Identity,
    RankOneTower,
    Rotation,
    apply_set,
    cat_map,
    chacon_stage,
    golden_approximant,
)


@dataclass
class Check:
    name: str
    passed: bool
    measured: str = ""


@dataclass
class CriterionReport:
    number: int
    title: str
    limit_seconds: float
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, name: str, passed, measured="") -> bool:
        self.checks.append(Check(name, bool(passed), str(measured)))
        return bool(passed)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c.name for c in self.checks if not c.passed]
        tail = f"; failed: {', '.join(failed)}" if failed else ""
        return (f"criterion {self.number} {status} [{self.title}] {len(self.checks)} checks "
                f"in {self.seconds:.1f}s (limit {self.limit_seconds:.0f}s){tail}")

    def to_json(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "limit_seconds": self.limit_seconds,
                "checks": [{"name": c.name, "passed": c.passed, "measured": c.measured} for c in self.checks]}


def _timed(number: int, title: str, limit: float):
    def wrap(body: Callable[[CriterionReport, np.random.Generator], None]):
        def run(seed: int = 0) -> CriterionReport:
            report = CriterionReport(number, title, limit)
            start = time.perf_counter()
            body(report, np.random.default_rng(seed))
            report.seconds = time.perf_counter() - start
            report.add("runtime", report.seconds < limit, f"{report.seconds:.1f}s")
            return report
        run.__name__ = body.__name__
        run.__doc__ = body.__doc__
        return run
    return wrap


# --------------------------------------------------------------------------
# Oracles
# --------------------------------------------------------------------------


def _random_rational(rng, max_den: int = 64) -> Fraction:
    q = int(rng.integers(1, max_den + 1))
    return Fraction(int(rng.integers(0, q)), q)


def _random_set(rng, pieces: int = 3, max_den: int = 64) -> IntervalSet:
    pts = sorted({_random_rational(rng, max_den) for _ in range(2 * pieces)})
    return normalize(zip(pts[0::2], pts[1::2]))


def brute_force_3aps(members: set[int], n: int, cyclic: bool) -> int:
    """Count ``(a, d)`` by direct enumeration."""
    total = 0
    for a in members:
        for d in range(1, n):
            b, c = a + d, a + 2 * d
            if cyclic:
                b, c = b % n, c % n
            elif c > n - 1:
                break
            if b in members and c in members:
                total += 1
    return total


def lattice_hits(matrix, a, b, c, n: int) -> list[int]:
    """``i <= n`` with ``int chi_a T^i chi_b T^{2i} chi_c != 0`` for ``T x = M x``.

    ``T^i chi_b = chi_{(M^T)^{-i} b}``, so the integral is nonzero exactly when
    ``(M^T)^{2i} a + (M^T)^i b + c = 0``; only forward integer powers appear.
    """
    mt = [[matrix[0][0], matrix[1][0]], [matrix[0][1], matrix[1][1]]]

    def step(v):
        return (mt[0][0] * v[0] + mt[0][1] * v[1], mt[1][0] * v[0] + mt[1][1] * v[1])

    u, w = tuple(a), tuple(b)
    hits = []
    for i in range(1, n + 1):
        u = step(step(u))
        w = step(w)
        if u[0] + w[0] + c[0] == 0 and u[1] + w[1] + c[1] == 0:
            hits.append(i)
    return hits


def roth_interval_oracle(a: Fraction) -> Fraction:
    """Limit of the Roth average of ``[0, a)``, ``a <= 1/2``, under an irrational rotation.

    With ``t`` equidistributed, ``mu(A & (A - t) & (A - 2t)) = a - 2|t|`` for
    ``|t| < a/2`` and 0 otherwise, whose integral over the circle is ``a^2 / 2``.
    """
    return a * a / 2


def naive_gap_scan(alpha: Fraction, delta: Fraction, horizon: int) -> int:
    """Largest gap between consecutive returns ``||i alpha|| < delta`` in ``0..horizon``."""
    p, q = alpha.numerator, alpha.denominator
    last, gap = 0, 0
    for i in range(1, horizon + 1):
        r = (i * p) % q
        if Fraction(min(r, q - r), q) < delta:
            gap = max(gap, i - last)
            last = i
    return gap


def _nonzero_mode(rng, bound: int = 3) -> tuple[int, int]:
    while True:
        mode = tuple(int(x) for x in rng.integers(-bound, bound + 1, size=2))
        if mode != (0, 0):
            return mode


def _cat_b_powers(v, k):
    """``(M^T)^{-k} v`` for the cat matrix, by repeated integer inversion."""
    # (M^T)^{-1} = [[1, -1], [-1, 2]] for M = [[2, 1], [1, 1]]
    for _ in range(k):
        v = (v[0] - v[1], -v[0] + 2 * v[1])
    return v


def _hit_triple(i: int, b, c):
    """``a`` making ``(a, b, c)`` resonate at step ``i`` on the cat map."""
    bb, cc = _cat_b_powers(b, i), _cat_b_powers(c, 2 * i)
    return (-(bb[0] + cc[0]), -(bb[1] + cc[1]))


# --------------------------------------------------------------------------
# Criteria
# --------------------------------------------------------------------------


def correspondence_checks(report: CriterionReport, rng, n_sets: int = 100, max_n: int = 512) -> None:
    bad, brute_bad = 0, 0
    for k in range(n_sets):
        n = int(rng.integers(1, max_n + 1))
        s = DensitySet.random(n, float(rng.uniform(0.1, 0.9)), rng)
        lhs = cyclic_roth_average(s) * n * n
        count = count_3aps(s, "cyclic")
        bad += lhs != count + s.size
        if k < 10:
            brute_bad += count != brute_force_3aps(set(s.members), n, cyclic=True)
    report.add("cyclic identity N^2 avg = count + |S|", bad == 0, f"{n_sets - bad}/{n_sets} exact")
    report.add("cyclic count vs brute force", brute_bad == 0, f"{10 - brute_bad}/10 match")
    s = DensitySet.random(64, 0.5, rng)
    via_system = roth_average(CyclicShift(64), s.as_interval_set(), (64,)).last
    report.add("cyclic shift system equivalence", via_system == cyclic_roth_average(s), str(via_system))


@_timed(1, "exactness", 60)
def criterion_1(report, rng):
    """Identity Roth average, cyclic identity and exact set transport."""
    sched = dyadic(4, 12)
    mismatches = 0
    for _ in range(5):
        a = _random_set(rng)
        series = roth_average(Identity(), a, sched)
        mismatches += sum(v != a.measure for v in series.values)
    report.add("roth_average(Identity, A) = mu(A)", mismatches == 0, f"{mismatches} mismatches")
    correspondence_checks(report, rng)
    failures = 0
    for _ in range(1000):
        kind = int(rng.integers(4))
        if kind == 0:
            sys = Rotation(_random_rational(rng, 1000))
        elif kind == 1:
            sys = CyclicShift(int(rng.integers(1, 50)))
        elif kind == 2:
            sys = RankOneTower(int(rng.integers(2, 6)))
        else:
            sys = Identity()
        limit = sys.height - 2 if isinstance(sys, RankOneTower) else 500
        i = int(rng.integers(-limit, limit + 1))
        a = _random_set(rng, pieces=int(rng.integers(1, 4)), max_den=81)
        b = apply_set(sys, a, i)
        if b.measure != a.measure or apply_set(sys, b, -i) != a:
            failures += 1
    report.add("apply_set preserves measure and inverts", failures == 0, f"{failures}/1000 failures")


GOLDEN_SCHEDULE = dyadic(7, 16) + (10 ** 5,)


@_timed(2, "roth positivity", 120)
def criterion_2(report, rng):
    """Golden rotation, A = [0, 1/4): value at 10^5 against the closed-form limit."""
    series = roth_average(Rotation(golden_approximant()), IntervalSet.interval(0, Fraction(1, 4)),
                          GOLDEN_SCHEDULE)
    oracle = roth_interval_oracle(Fraction(1, 4))
    err = abs(float(series.last - oracle))
    report.add("|avg(10^5) - 1/32| < 2e-3", err < 2e-3, f"{float(series.last):.6f} (err {err:.2e})")
    tail = [v for n, v in series if n > 2 ** 10]
    report.add("positive beyond 2^10", all(v > 0 for v in tail), f"min {float(min(tail)):.6f}")


@_timed(3, "certificate", 60)
def criterion_3(report, rng):
    """Positivity certificate for the golden rotation with eps = 1/20."""
    sys = Rotation(golden_approximant())
    a = IntervalSet.interval(0, Fraction(1, 4))
    cert = positivity_certificate(sys, a, Fraction(1, 20))
    report.add("lower_bound > 0", cert.lower_bound > 0, f"L={cert.L} lower_bound={float(cert.lower_bound):.3e}")
    series = roth_average(sys, a, GOLDEN_SCHEDULE)
    top = series.values[-2:]
    report.add("lower_bound <= roth_average at two largest checkpoints",
               all(cert.lower_bound <= v for v in top), ", ".join(f"{float(v):.5f}" for v in top))
    rb = cert.return_bound
    ok = rb.verified_range >= 10 * rb.L and windows_hold(rb.alpha, rb.delta, rb.L, 10 * rb.L)
    report.add("return-bound scan over n <= 10 L", ok, f"verified to {rb.verified_range}")


CHACON_STAGE = 12


def chacon_level_difference(stage: int, a: int, b: int, terminal: int = CHACON_STAGE) -> StepFunction:
    st = chacon_stage(stage, terminal=terminal)
    return StepFunction.indicator(st.level_set([a])) - StepFunction.indicator(st.level_set([b]))


@_timed(4, "weak-mixing convergence", 300)
def criterion_4(report, rng):
    """Cat map against the lattice oracle; Chacon stage-12 L2 defect trend."""
    cat = cat_map()
    sched = (10, 100, 1000, 10 ** 4)
    chi = TrigPolynomial.character
    triples = [((1, 0), (0, 1), (1, 1)), ((2, -1), (1, 0), (1, 1))]
    triples += [(_hit_triple(i, b, c), b, c) for i, b, c in [(1, (1, 0), (0, 1)), (3, (1, 1), (2, 1)),
                                                           (7, (0, 1), (1, -1))]]
    agree, bounded = True, True
    notes = []
    for a, b, c in triples:
        series = scalar_multicorrelation(cat, [chi(a), chi(b), chi(c)], sched)
        hits = lattice_hits(CAT_MATRIX, a, b, c, sched[-1])
        for n, v in series:
            h = sum(1 for i in hits if i <= n)
            agree &= v == Fraction(h, n)
            bounded &= abs(v) <= Fraction(h, n)
        notes.append(f"{len(hits)}")
    report.add("cat scalar = lattice oracle (N <= 10^4)", agree, f"hits per triple {'/'.join(notes)}")
    report.add("cat |scalar| <= hits/N", bounded)
    fs = [chacon_level_difference(3, 0, 1), chacon_level_difference(2, 0, 5), chacon_level_difference(1, 0, 2)]
    zero_mean = all(f.integral() == 0 for f in fs)
    series = l2_multicorrelation_defect(RankOneTower(CHACON_STAGE), fs, dyadic(7, 17))
    first, last = series.values[0], series.values[-1]
    report.add("chacon observables zero mean", zero_mean)
    report.add("chacon L2 defect at 2^17 < 0.1", last < 0.1, f"{last:.3e}")
    report.add("chacon L2 defect decreases from 2^7", last < first, f"{first:.3e} -> {last:.3e}")


@_timed(5, "bootstrap consistency", 120)
def criterion_5(report, rng):
    """Cauchy-Schwarz bridge between the scalar (1, m) and L2 (2, m) defects."""
    cat = cat_map()
    chi = TrigPolynomial.character
    sched = dyadic(3, 12)
    worst = 0.0
    ok = True
    for m in (2, 3, 4):
        for trial in range(3):
            if trial == 0 and m == 2:
                # f0 chosen so the correlation is nonzero at i = 1
                f0 = chi(_hit_triple(1, (1, 0), (0, 1)))
                fs = [chi((1, 0)), chi((0, 1))]
            else:
                f0 = chi(_nonzero_mode(rng))
                fs = [chi(_nonzero_mode(rng)) for _ in range(m)]
            scalar = scalar_multicorrelation(cat, [f0] + fs, sched)
            l2 = l2_multicorrelation_defect(cat, fs, sched)
            target = complex(f0.integral())
            for f in fs:
                target *= complex(f.integral())
            norm0 = l2_norm(f0)
            for (n, s), d in zip(scalar, l2.values):
                lhs = abs(complex(s) - target)
                rhs = norm0 * d
                worst = max(worst, lhs - rhs)
                ok &= lhs <= rhs + 1e-9
    report.add("|scalar defect| <= ||f0|| * L2 defect, m = 2, 3, 4", ok, f"max excess {worst:.2e}")


def _joining_inputs(rng):
    kind = int(rng.integers(3))
    if kind == 0:
        sys = cat_map()

        def obs():
            mode = tuple(int(x) for x in rng.integers(-2, 3, size=2))
            pick = int(rng.integers(3))
            if pick == 0:
                return TrigPolynomial.character(mode)
            if pick == 1 and mode != (0, 0):
                return TrigPolynomial.cosine(mode, Fraction(int(rng.integers(1, 4)), 2))
            return TrigPolynomial.constant(Fraction(int(rng.integers(-2, 3)), 3), 2)
    elif kind == 1:
        sys = Rotation(_random_rational(rng, 997))

        def obs():
            return TrigPolynomial.character((int(rng.integers(-3, 4)),))
    else:
        stage = chacon_stage(2, terminal=6)
        sys = RankOneTower(6)

        def obs():
            levels = [int(k) for k in rng.choice(stage.height, size=int(rng.integers(1, 4)), replace=False)]
            return StepFunction.indicator(stage.level_set(levels)) * Fraction(int(rng.integers(1, 4)), 2)
    return sys, obs


@_timed(6, "joining laws", 180)
def criterion_6(report, rng):
    """Telescoping invariance bounds, marginal collapse and the diagonal identity."""
    fails = []
    for trial in range(50):
        sys, obs = _joining_inputs(rng)
        pattern = ("J", "nu", "eta")[trial % 3]
        fs = [obs() for _ in range(6 if pattern == "eta" else 3)]
        n = int(rng.integers(8, 129))
        d = invariance_defect(sys, fs, n, pattern)
        if not within_bound(d, defect_bound(fs, n)):
            fails.append(f"{sys.kind}/{pattern}/N={n}")
    report.add("invariance_defect <= (2/N) prod sup, 50 inputs", not fails, ", ".join(fails) or "all within")
    collapse = True
    for sys, fs in [
        (cat_map(), [TrigPolynomial.cosine((1, 0)), TrigPolynomial.character((0, 1)), TrigPolynomial.cosine((1, 1))]),
        (Rotation(Fraction(5, 13)), [TrigPolynomial.character((k,)) for k in (1, -2, 1)]),
        (RankOneTower(6), [StepFunction.indicator(chacon_stage(2, terminal=6).level_set([k])) for k in (0, 3, 5)]),
    ]:
        one = TrigPolynomial.constant(1, fs[0].dim) if isinstance(fs[0], TrigPolynomial) else StepFunction.constant(1)
        for n in (1, 7, 64):
            eta = empirical_joining_6(sys, *fs, one, one, one, n).value
            nu = scalar_multicorrelation(sys, [one] + fs, (n,)).last
            collapse &= eta == nu
    report.add("eta marginal collapse exact", collapse)
    cat = cat_map()
    fs = [TrigPolynomial.cosine((1, 0)), TrigPolynomial.cosine((0, 1)), TrigPolynomial.cosine((1, 1))]
    n = 2 ** 10
    eta = float(empirical_joining_6(cat, *fs, *fs, n).value)
    l2 = l2_multicorrelation_defect(cat, fs, (n,)).last
    report.add("diagonal order-6 = squared L2 defect at 2^10", abs(eta - l2 * l2) <= 1e-9,
               f"{eta:.6e} vs {l2 * l2:.6e}")


@_timed(7, "spectral dichotomy", 180)
def criterion_7(report, rng):
    """Projector laws on three system families; weak-mixing defects at 2^17."""
    projs = {
        "rotation": kronecker_projector(Rotation(golden_approximant()), cutoff=8),
        "cat": kronecker_projector(cat_map(), cutoff=6),
        "chacon": kronecker_projector(RankOneTower(8), cutoff=3),
    }
    for name, p in projs.items():
        err = max(p.idempotence_error(), p.adjointness_error())
        report.add(f"{name} projector idempotent and self-adjoint", err <= 1e-8, f"{err:.1e}")
    rot = projs["rotation"].matrix
    err = float(np.linalg.norm(rot - np.eye(rot.shape[0]), 2))
    report.add("rotation projector = identity on window", err <= 1e-8, f"{err:.1e}")
    cat = projs["cat"]
    e0 = cat.constant_vector()
    err = float(np.linalg.norm(cat.matrix - np.outer(e0, e0.conj()), 2))
    report.add("cat projector = mean projection", err <= 1e-8, f"{err:.1e}")
    w = tower_weights(RankOneTower(8), 3)
    err = float(np.linalg.norm(projs["chacon"].matrix - np.outer(w, w), 2))
    report.add("chacon projector = mean projection", err <= 1e-8, f"{err:.1e}")
    n = 2 ** 17
    cos = TrigPolynomial.cosine
    chacon = RankOneTower(CHACON_STAGE)
    small = [
        ("cat cos(1,0)/cos(1,1)", cat_map(), cos((1, 0)), cos((1, 1))),
        ("cat cos(1,0)/cos(1,0)", cat_map(), cos((1, 0)), cos((1, 0))),
        ("chacon stage-1 levels", chacon, chacon_level_difference(1, 0, 1), chacon_level_difference(1, 2, 3)),
        ("chacon stage-1 self", chacon, chacon_level_difference(1, 0, 1), chacon_level_difference(1, 0, 1)),
    ]
    for name, sys, f, g in small:
        v = float(weak_mixing_defect(sys, f, g, (n,)).last)
        report.add(f"D_N < 0.01: {name}", v < 0.01, f"{v:.2e}")
    chi = TrigPolynomial.character
    rot = Rotation(golden_approximant())
    for k in (1, 2):
        v = float(weak_mixing_defect(rot, chi((k,)), chi((k,)), (n,)).last)
        report.add(f"D_N >= 0.9: rotation chi_{k}", v >= 0.9, f"{v:.4f}")


def _sqrt_convergent(d: int, bits: int) -> Fraction:
    """Rational approximant of ``frac(sqrt(d))`` with a denominator of about ``bits`` bits."""
    from math import isqrt

    scale = 1 << bits
    return Fraction(isqrt(d * scale * scale) - isqrt(d) * scale, scale).limit_denominator(1 << (bits // 2))


RETURN_ANGLES = [
    Fraction(0), Fraction(1, 2), Fraction(1, 3), Fraction(2, 7), Fraction(5, 13), Fraction(175, 208),
    Fraction(16, 113), Fraction(89, 144), Fraction(3, 1000), Fraction(999, 1000), Fraction(1, 97),
    golden_approximant(), golden_approximant(40), _sqrt_convergent(2, 64), _sqrt_convergent(3, 64),
    _sqrt_convergent(5, 64), _sqrt_convergent(7, 48), _sqrt_convergent(11, 80), Fraction(4181, 10946),
    Fraction(41, 29) - 1,
]
RETURN_DELTAS = [Fraction(1, 10), Fraction(241, 1000), Fraction(1, 50), Fraction(1, 7), Fraction(1, 200)]


@_timed(8, "return bounds", 60)
def criterion_8(report, rng):
    """Continued-fraction L against a brute-force gap scan to 10^5."""
    covered, scanned = [], True
    for k, alpha in enumerate(RETURN_ANGLES):
        delta = RETURN_DELTAS[k % len(RETURN_DELTAS)]
        try:
            rb = syndetic_return_bound(alpha, delta)
        except VerificationError:
            scanned = False
            covered.append(False)
            continue
        gap = naive_gap_scan(alpha, delta, 10 ** 5)
        covered.append(rb.L >= gap)
    report.add("L >= brute-force maximal gap, 20 angles", all(covered), f"{sum(covered)}/{len(covered)}")
    report.add("window scan invariant holds", scanned)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}

SUITES = {
    "exactness": (1,),
    "certificate": (2, 3, 8),
    "weak-mixing": (4, 6, 7),
    "bootstrap": (5,),
    "all": tuple(CRITERIA),
}


@_timed(1, "correspondence", 60)
def correspondence_suite(report, rng):
    """Cyclic identity on 100 random sets with a brute-force count inside."""
    correspondence_checks(report, rng)


def run_suite(name: str, seed: int = 0) -> list[CriterionReport]:
    if name == "correspondence":
        return [correspondence_suite(seed)]
    if name not in SUITES:
        raise KeyError(name)
    return [CRITERIA[k](seed) for k in SUITES[name]]


SUITE_NAMES = tuple(SUITES) + ("correspondence",)

from fractions import Fraction

import numpy as np
import pytest

from ergolab.errors import DomainError
from ergolab.measure_algebra import StepFunction, TrigPolynomial
from ergolab.spectral import (
    continued_fraction,
    koopman_matrix,
    kronecker_projector,
    max_return_gap,
    syndetic_return_bound,
    tower_weights,
    weak_mixing_defect,
    windows_hold,
)
from ergolab.systems import Product, RankOneTower, Rotation, cat_map, chacon_stage, golden_approximant

F = Fraction


def test_continued_fraction_convergents():
    cf = continued_fraction(F(16, 113))
    assert cf.quotients == (0, 7, 16)
    assert cf.convergents[-1] == (16, 113)


@pytest.mark.parametrize("alpha,delta,L", [(F(1, 2), F(1, 10), 2), (F(0), F(1, 10), 1),
                                           (golden_approximant(), F(1, 800), 987)])
def test_return_bound_values(alpha, delta, L):
    assert syndetic_return_bound(alpha, delta).L == L


def test_return_bound_handles_degenerate_convergent():
    # the first convergent with small ||q alpha|| but large |q alpha - p| would give too small a bound here
    alpha, delta = F(175, 208), F(241, 1000)
    rb = syndetic_return_bound(alpha, delta)
    assert rb.L >= max_return_gap(alpha, delta, 10 ** 4)
    assert windows_hold(alpha, delta, rb.L, 10 * rb.L)


def test_brute_scan_method():
    rb = syndetic_return_bound(F(5, 13), F(1, 7), method="brute-scan", horizon=1000)
    assert rb.L == max_return_gap(F(5, 13), F(1, 7), 1000)
    with pytest.raises(DomainError):
        syndetic_return_bound(F(5, 13), F(1, 2))


def test_rotation_projector_is_identity():
    p = kronecker_projector(Rotation(F(1, 4)), cutoff=2)
    assert p.rank == 5
    assert np.allclose(p.matrix, np.eye(5), atol=1e-12)


def test_cat_projector_is_mean_projection():
    p = kronecker_projector(cat_map(), cutoff=4)
    e0 = p.constant_vector()
    assert p.rank == 1
    assert np.linalg.norm(p.matrix - np.outer(e0, e0)) < 1e-12
    assert p.idempotence_error() < 1e-12 and p.adjointness_error() < 1e-12


def test_product_projector_keeps_rotation_factor():
    # modes (0, 0, b) are eigenfunctions of cat x rotation; everything else is mixed away
    p = kronecker_projector(Product(cat_map(), Rotation(F(1, 7))), cutoff=1)
    assert p.rank == 3


def test_chacon_projector_is_mean_projection():
    p = kronecker_projector(RankOneTower(7), cutoff=2)
    w = tower_weights(RankOneTower(7), 2)
    assert p.rank == 1
    assert np.linalg.norm(p.matrix - np.outer(w, w)) < 1e-10


def test_koopman_matrix_unitary_on_lattice_window():
    km = koopman_matrix(Rotation(F(2, 5)), cutoff=3)
    m = km.matrix
    assert np.allclose(m.conj().T @ m, np.eye(m.shape[0]))


def test_weak_mixing_defect_rotation_eigenfunction():
    series = weak_mixing_defect(Rotation(F(3, 7)), TrigPolynomial.character((1,)), TrigPolynomial.character((1,)),
                                [7, 70])
    assert series.values == (1, 1)


def test_weak_mixing_defect_cat_vanishes():
    c = TrigPolynomial.cosine
    assert weak_mixing_defect(cat_map(), c((1, 0)), c((2, 1)), [100]).last < F(1, 50)


def test_weak_mixing_defect_cell_route_matches_step_route():
    tower = RankOneTower(4)
    st_ = chacon_stage(1, terminal=4)
    f = StepFunction.indicator(st_.level_set([0])) - StepFunction.indicator(st_.level_set([2]))
    g = StepFunction.indicator(st_.level_set([1]))
    cell = weak_mixing_defect(tower, f, g, [10, 30])
    from ergolab.systems import koopman_apply

    target = f.integral() * g.integral()
    for n, v in cell:
        brute = sum(((koopman_apply(tower, f, i) * g).integral() - target) ** 2 for i in range(1, n + 1)) / n
        assert v == brute


@pytest.mark.parametrize("alpha,quotients", [(F(1, 3), (0, 3)), (F(2, 5), (0, 2, 2))])
def test_continued_fraction_examples(alpha, quotients):
    assert continued_fraction(alpha).quotients == quotients


def test_convergent_quality():
    for alpha in (golden_approximant(), F(175, 208), F(16, 113)):
        conv = continued_fraction(alpha).convergents
        pairs = list(zip(conv, conv[1:]))
        for (p, q), (_, q_next) in pairs[:-1]:
            assert abs(alpha - F(p, q)) * q * q_next < 1
        # alpha is itself the last convergent, so the final pair is tight
        (p, q), (_, q_next) = pairs[-1]
        assert abs(alpha - F(p, q)) * q * q_next == 1
    assert set(continued_fraction(golden_approximant()).quotients[1:-1]) == {1}


def test_cat_koopman_matrix_loss():
    km = koopman_matrix(cat_map(), cutoff=8)
    m = np.abs(km.matrix)
    assert np.all(m.sum(axis=0) <= 1)
    assert km.loss == int(np.sum(m.sum(axis=0) == 0))
    assert km.loss > 0


def test_rotation_koopman_matrix_phases():
    km = koopman_matrix(Rotation(F(1, 4)), cutoff=2)
    expected = [np.exp(-2j * np.pi * a / 4) for (a,) in km.basis]
    assert np.allclose(km.matrix, np.diag(expected))


def test_product_projector_keeps_rotation_coordinate():
    p = kronecker_projector(Product(Rotation(F(2, 7)), cat_map()), cutoff=2)
    expected = np.diag([1.0 if m[1:] == (0, 0) else 0.0 for m in p.basis])
    assert np.linalg.norm(p.matrix - expected) < 1e-8
    assert p.fixed_point_error() < 1e-8

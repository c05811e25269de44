"""
不變特徵分佈測試：基底求值、銜接條件與弱特徵方程
"""

import numpy as np
import pytest

from app.algebra import CartanClass, adjoint, canonical_element, involution, random_h
from app.algebra.block import BlockVector
from app.eigendist import (
    BasisFunction,
    BasisKind,
    TestFunctionJet,
    all_basis,
    broken_radial,
    evaluate,
    evaluate_batch,
    fit_control,
    matching_2,
    matching_m,
    one_sided_derivative,
    richardson_limit,
    varpi_basis,
    w_bracket_radial,
    weak_eigen,
)
from app.errors import IrregularCharacter, LogPole, OutsideDomain
from app.specfun import Kind, SeriesSolution


def test_all_basis_has_six_functions(lambdas):
    basis = all_basis(*lambdas)
    assert len(basis) == 6
    assert [bf.which for bf in basis[:2]] == [BasisKind.ANA, BasisKind.SING]
    assert len({bf.name for bf in basis}) == 6


def test_basis_validation(lambdas):
    with pytest.raises(IrregularCharacter):
        BasisFunction.ana(1.0, 1.0)
    with pytest.raises(ValueError):
        BasisFunction.plus(*lambdas, a_kind=Kind.W_SMALL)


def test_ana_value_on_cartan(lambdas):
    lam1, lam2 = lambdas
    X = canonical_element(CartanClass.APP, (1.6, 0.5))
    u, v = 1.6**2, 0.5**2
    A, B = SeriesSolution(lam1), SeriesSolution(lam2)
    expected = (A(u) * B(v) - A(v) * B(u)) / (u - v)
    assert evaluate(BasisFunction.ana(lam1, lam2), X) == pytest.approx(expected, rel=1e-12)


def test_basis_is_h_invariant(lambdas, rng):
    X = canonical_element(CartanClass.A2, (1.0, 0.5))
    for bf in all_basis(*lambdas)[:2]:
        base = evaluate(bf, X)
        for _ in range(3):
            moved = evaluate(bf, adjoint(random_h(rng), X))
            assert abs(moved - base) <= 1e-8 * (1.0 + abs(base))


def test_plus_vanishes_off_split_set(lambdas):
    X = canonical_element(CartanClass.A2, (1.0, 0.5))
    plus = BasisFunction.plus(*lambdas)
    assert evaluate(plus, X) == 0


def test_batch_matches_scalar(lambdas, rng):
    X = canonical_element(CartanClass.APM, (1.5, 0.7))
    points = np.stack([adjoint(random_h(rng), X).to_vector() for _ in range(4)])
    for bf in all_basis(*lambdas):
        batch = evaluate_batch(bf, points)
        for row, value in zip(points, batch):
            assert value == pytest.approx(evaluate(bf, BlockVector.from_vector(row)), rel=1e-8, abs=1e-10)


def test_domain_errors(lambdas):
    with pytest.raises(OutsideDomain):
        evaluate(BasisFunction.ana(*lambdas), BlockVector.from_vector(np.zeros(8)))
    with pytest.raises(LogPole):
        evaluate(BasisFunction.sing(*lambdas), canonical_element(CartanClass.APP, (1.2, 0.0)))


@pytest.mark.parametrize("index", range(6))
def test_varpi_relation(lambdas, index):
    bf = all_basis(*lambdas)[index]
    sign, flipped = varpi_basis(bf)
    X = canonical_element(CartanClass.APP, (1.6, 0.5))
    lhs = evaluate(bf, involution(X, "varpi"))
    rhs = sign * evaluate(flipped, X)
    assert abs(lhs - rhs) <= 1e-9 * (1.0 + abs(rhs))


def test_richardson_limit_removes_polynomial_error():
    h = 0.1 * 0.5 ** np.arange(4)
    limit, err = richardson_limit(1.0 + 2.0 * h + 3.0 * h**2)
    assert limit == pytest.approx(1.0, abs=1e-12)
    assert err < 1e-10


def test_one_sided_derivative():
    value, _ = one_sided_derivative(np.exp, 0.05)
    assert value == pytest.approx(1.0, abs=1e-8)


def test_matching_m_holds_for_ana(lambdas):
    report = matching_m(BasisFunction.ana(*lambdas), 0.7)
    assert report.passed, report.to_dict()


def test_matching_m_detects_broken_function(lambdas):
    report = matching_m(broken_radial(*lambdas), 0.7)
    assert not report.passed
    assert report.jump1 > 100 * report.tol * report.scale


def test_matching_m_rejects_probe_near_window():
    with pytest.raises(ValueError):
        matching_m(BasisFunction.ana(1.3, -0.7), 0.01)


@pytest.mark.parametrize("side", ["direct", "varpi"])
def test_matching_2_holds_for_sing(lambdas, side):
    report = matching_2(BasisFunction.sing(*lambdas), 0.8, side)
    assert report.passed, report.to_dict()


def test_matching_2_detects_w_bracket(lambdas):
    report = matching_2(w_bracket_radial(*lambdas), 0.8, "varpi")
    assert not report.passed


def test_weak_eigen_for_ana(lambdas, small_mc):
    f = TestFunctionJet(canonical_element(CartanClass.APP, (1.6, 0.5)).to_vector(), 0.3, name="bump_Um")
    bf = BasisFunction.ana(*lambdas)
    ok = weak_eigen(bf, f, "Q", 160_000, seed=2, sigma_level=4.0)
    assert ok.passed, ok.to_dict()
    shifted = weak_eigen(bf, f, "Q", 160_000, seed=2, chi_shift=1.0, sigma_level=4.0)
    # 同一組樣本：缺陷恰好多了 −1·⟨F, f⟩
    assert abs(shifted.estimate - (ok.estimate - shifted.inner)) <= 1e-9 * (1.0 + abs(shifted.inner))
    assert abs(shifted.estimate) > 10 * shifted.sigma


def test_control_variate_keeps_mean(lambdas, small_mc):
    f = TestFunctionJet(canonical_element(CartanClass.APP, (1.6, 0.5)).to_vector(), 0.3, name="bump_Um")
    bf = BasisFunction.ana(*lambdas)
    plain = weak_eigen(bf, f, "Q", 64_000, seed=4, chi_shift=1.0, control=False)
    reduced = weak_eigen(bf, f, "Q", 64_000, seed=4, chi_shift=1.0)
    assert reduced.sigma < plain.sigma
    gap = abs(plain.estimate - reduced.estimate)
    assert gap <= 5.0 * (plain.sigma + reduced.sigma)


def test_fit_control_is_accurate_near_center(lambdas):
    f = TestFunctionJet(canonical_element(CartanClass.APP, (1.6, 0.5)).to_vector(), 0.3)
    cv = fit_control(BasisFunction.ana(*lambdas), f, seed=1)
    assert cv.residual < 5e-2
    assert cv.poly.order == 3

"""
特殊函數測試：級數解、Wronskian 與括號組合
"""

import numpy as np
import pytest
from scipy import special

from app.errors import BranchViolation, IrregularCharacter, TruncationFailure
from app.specfun import (
    EULER_GAMMA,
    Kind,
    SeriesSolution,
    SolutionPair,
    a_coefficients,
    bracket,
    check_regular_character,
    derivatives,
    divided_bracket,
    ode_residual,
    s_lambda,
    splus,
    wronskian_constant,
)


@pytest.mark.parametrize("lam", [0.5, 2.0, 7.5])
def test_phi_matches_modified_bessel(lam):
    t = np.linspace(0.01, 3.0, 25)
    phi = SeriesSolution(lam, Kind.PHI)
    np.testing.assert_allclose(phi(t).real, special.i0(np.sqrt(lam * t)), rtol=1e-12)
    assert np.max(np.abs(phi(t).imag)) < 1e-15


@pytest.mark.parametrize("lam", [-0.5, -3.0])
def test_phi_matches_bessel_j0_for_negative_lambda(lam):
    t = np.linspace(0.01, 3.0, 25)
    phi = SeriesSolution(lam, Kind.PHI)
    np.testing.assert_allclose(phi(t).real, special.j0(np.sqrt(-lam * t)), rtol=1e-10, atol=1e-13)


def test_w_real_matches_k0():
    # W_λ^r(t) = −2K₀(√(λt)) − log(λ/4)Φ_λ(t)，t > 0、λ > 0
    lam = 1.7
    t = np.geomspace(1e-3, 4.0, 20)
    w = SeriesSolution(lam, Kind.W_REAL)
    phi = SeriesSolution(lam, Kind.PHI)
    expected = -2.0 * special.k0(np.sqrt(lam * t)) - np.log(lam / 4.0) * phi(t).real
    np.testing.assert_allclose(w(t).real, expected, rtol=1e-10, atol=1e-12)


def test_a_coefficients_are_shifted_harmonic_numbers():
    a = a_coefficients(10)
    assert len(a) == 11
    harmonic = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, 11))])
    np.testing.assert_allclose(a, 2 * EULER_GAMMA - 2 * harmonic, rtol=0, atol=1e-14)


@pytest.mark.parametrize("kind", [Kind.PHI, Kind.W_COMPLEX])
def test_ode_residual_complex_plane(lambdas, kind):
    z = np.array([0.3 + 0.2j, 1.5 - 0.7j, -0.8 + 0.4j, 2.0 + 1.0j])
    for lam in lambdas:
        sol = SeriesSolution(lam, kind)
        res = ode_residual(sol, z)
        y = np.abs(sol(z))
        assert np.all(np.abs(res) <= 1e-10 * (1.0 + y))


def test_ode_residual_real_branch(lambdas):
    t = np.concatenate([-np.geomspace(2.0, 1e-3, 8), np.geomspace(1e-3, 2.0, 8)])
    for lam in lambdas:
        sol = SeriesSolution(lam, Kind.W_REAL)
        res = ode_residual(sol, t)
        assert np.all(np.abs(res) <= 1e-9 * (1.0 + np.abs(sol(t))))


def test_wronskian_is_one(lambdas):
    t = np.array([-1.5, -0.2, 0.05, 0.7, 2.5])
    for lam in lambdas:
        np.testing.assert_allclose(wronskian_constant(lam, t), 1.0, atol=1e-10)


def test_derivatives_match_finite_differences():
    sol = SeriesSolution(0.9 - 0.3j, Kind.W_REAL)
    t, h = 0.8, 1e-5
    y, dy, _ = derivatives(sol, t, 2)
    fd = (sol(t + h) - sol(t - h)) / (2 * h)
    assert abs(dy - fd) < 1e-7


def test_w_real_rejects_zero_and_complex():
    sol = SeriesSolution(1.0, Kind.W_REAL)
    with pytest.raises(BranchViolation):
        sol(0.0)
    with pytest.raises(BranchViolation):
        sol(0.5 + 0.1j)


def test_w_complex_rejects_negative_axis():
    with pytest.raises(BranchViolation):
        SeriesSolution(1.0, Kind.W_COMPLEX)(-2.0)


def test_truncation_guard():
    with pytest.raises(TruncationFailure):
        SeriesSolution(1.0, Kind.PHI, max_terms=3)(50.0)


def test_irregular_character():
    with pytest.raises(IrregularCharacter):
        check_regular_character(1.0, 1.0)
    with pytest.raises(IrregularCharacter):
        SolutionPair(SeriesSolution(0.0), SeriesSolution(1.0))


def test_bracket_symmetries(lambdas):
    f = SeriesSolution(lambdas[0], Kind.PHI)
    g = SeriesSolution(lambdas[1], Kind.PHI)
    x1, x2 = 0.7, -0.4
    assert abs(bracket(f, g, x1, x2) + bracket(f, g, x2, x1)) < 1e-14
    assert abs(splus(f, g, x1, x2) - splus(f, g, x2, x1)) < 1e-14
    assert abs(bracket(f, g, x1, x1)) == 0


def test_s_lambda_is_branch_free(lambdas):
    # 與 W^r 的組合比較：log|z₁z₂| 吸收了對數項
    lam1, lam2 = lambdas
    phi1, phi2 = SeriesSolution(lam1), SeriesSolution(lam2)
    w1, w2 = SeriesSolution(lam1, Kind.W_REAL), SeriesSolution(lam2, Kind.W_REAL)
    x1, x2 = 0.6, -1.3
    expected = bracket(phi1, w2, x1, x2) + bracket(w1, phi2, x1, x2)
    assert abs(s_lambda(lam1, lam2, x1, x2) - expected) < 1e-12


def test_divided_bracket_is_continuous_across_diagonal(lambdas):
    f = SeriesSolution(lambdas[0], Kind.PHI)
    g = SeriesSolution(lambdas[1], Kind.PHI)
    x = 0.9
    far = divided_bracket(f, g, x + 1e-2, x - 1e-2, switch=1e-6)
    near = divided_bracket(f, g, x + 1e-2, x - 1e-2, switch=1.0)
    assert abs(far - near) < 1e-10
    # 對角線上等於 Wronskian f'g − fg'
    diag = divided_bracket(f, g, x, x)
    expected = f.d(x) * g(x) - f(x) * g.d(x)
    assert abs(diag - expected) < 1e-12


def test_divided_bracket_rejects_log_kinds():
    with pytest.raises(BranchViolation):
        divided_bracket(SeriesSolution(1.0, Kind.W_REAL), SeriesSolution(2.0), 0.5, 0.4)

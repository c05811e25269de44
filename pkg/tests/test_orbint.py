"""
軌道積分測試：下降映射、bump 測試函數與 Weyl 積分公式
"""

import math

import numpy as np
import pytest

from app.algebra import CartanClass, adjoint, canonical_element, invariants, random_h
from app.algebra.block import BlockVector
from app.algebra.invariants import invariants_batch
from app.errors import EmptySupport, SupportViolation
from app.meanfn import Signature, gaussian, mean_density, pushforward, uniform_edges
from app.orbint import densities
from app.orbint import (
    UNIT_BALL_VOLUME_8,
    QTestFunction,
    bump_profile,
    descent_psi,
    descent_psi3,
    descent_psi3_batch,
    descent_psi_batch,
    orbital_densities,
    split_log_axis,
    suggest_edges,
    weyl_check,
)


def test_descent_maps():
    for x, y, z in ((0.3, -1.2, 0.7), (2.0, 0.5, -1.5)):
        assert invariants(descent_psi(x, y)).Q.real == pytest.approx(x * x - y * y)
        assert invariants(descent_psi3(x, y, z)).Q.real == pytest.approx(2.0 * (x * x + y * y - z * z))


def test_descent_batch_matches_scalar(rng):
    pts = rng.uniform(-1.0, 1.0, size=(10, 3))
    batch2 = descent_psi_batch(pts[:, :2])
    batch3 = descent_psi3_batch(pts)
    for i, (x, y, z) in enumerate(pts):
        np.testing.assert_allclose(batch2[i], descent_psi(x, y).to_vector())
        np.testing.assert_allclose(batch3[i], descent_psi3(x, y, z).to_vector())


def test_bump_profile_derivatives():
    s = np.linspace(-0.5, 0.9, 15)
    h = 1e-6
    g = bump_profile(s, order=2)
    plus, minus = bump_profile(s + h, 1), bump_profile(s - h, 1)
    np.testing.assert_allclose(g[1], (plus[0] - minus[0]) / (2 * h), rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(g[2], (plus[1] - minus[1]) / (2 * h), rtol=1e-5, atol=1e-8)
    assert np.all(bump_profile(np.array([1.0, 1.5]))[0] == 0)


def test_bump_profile_order_limit():
    with pytest.raises(ValueError):
        bump_profile(0.1, order=5)


def test_test_function_support_and_volume(rng):
    f = QTestFunction.at(canonical_element(CartanClass.APP, (1.6, 0.5)), 0.3)
    x = f.sample(rng, 2000)
    assert np.all(f.s_values(x) < 1.0)
    assert np.all(f(x) > 0)
    assert f.volume == pytest.approx(UNIT_BALL_VOLUME_8 * 0.3**8)
    assert f(f.center[None, :])[0] == pytest.approx(1.0)


def test_test_function_rejects_bad_radius():
    with pytest.raises(EmptySupport):
        QTestFunction(np.zeros(8), 0.0)


def test_compose_adjoint(rng):
    f = QTestFunction.at(canonical_element(CartanClass.A2, (1.0, 0.5)), 0.4)
    h = random_h(rng)
    g = f.compose_adjoint(h)
    for _ in range(5):
        X = BlockVector.from_vector(rng.normal(size=8))
        assert g(X.to_vector()[None, :])[0] == pytest.approx(f(adjoint(h, X).to_vector()[None, :])[0], abs=1e-12)
    assert g.volume == pytest.approx(f.volume, rel=1e-8)


def test_support_flags():
    f = QTestFunction.at(canonical_element(CartanClass.APP, (1.6, 0.5)), 0.3)
    flags = f.require("in_U", "in_U_m", n_samples=4000)
    assert flags.in_Um
    near_zero = QTestFunction(np.zeros(8), 0.3, name="origin")
    with pytest.raises(SupportViolation):
        near_zero.require("in_U3", n_samples=4000)


def test_split_log_axis():
    edges = split_log_axis(-1.0, 1.0, 1e-3, 1e-1, n_log=4, n_lin=3)
    assert np.all(np.diff(edges) > 0)
    assert edges[0] == -1.0 and edges[-1] == 1.0
    assert np.any(np.isclose(edges, 1e-3)) and np.any(np.isclose(edges, -1e-3))


def test_weyl_integration_formula(small_mc):
    f = QTestFunction.at(canonical_element(CartanClass.A2, (1.0, 0.5)), 0.3, name="bump_U3")
    edges = suggest_edges(f, seed=3)
    dens = orbital_densities(f, edges["m"], edges["2"], 80_000, seed=3, edges_r=edges["r"])
    entries = weyl_check(f, dens, phis=("1", "Q"), seed=3, sigma_level=4.0)
    for entry in entries:
        assert entry.passed, entry.to_dict()
    one = entries[0]
    assert one.lhs > 0
    assert math.isfinite(one.rhs)


def _double_jacobian(monkeypatch, name: str):
    orig = getattr(densities, name)
    monkeypatch.setattr(densities, name, lambda a, b: 2.0 * orig(a, b))


@pytest.mark.parametrize(
    "cartan, params, jacobian",
    [
        (CartanClass.A2, (1.0, 0.5), "jacobian_2"),
        (CartanClass.APP, (1.6, 0.5), "jacobian_m"),
    ],
)
def test_weyl_check_catches_wrong_jacobian(small_mc, monkeypatch, cartan, params, jacobian):
    f = QTestFunction.at(canonical_element(cartan, params), 0.3)
    edges = suggest_edges(f, seed=5)
    dens = orbital_densities(f, edges["m"], edges["2"], 80_000, seed=5, edges_r=edges["r"])
    assert all(e.passed for e in weyl_check(f, dens, phis=("1",), seed=5, sigma_level=4.0))
    _double_jacobian(monkeypatch, jacobian)
    entry = weyl_check(f, dens, phis=("1",), seed=5, sigma_level=4.0)[0]
    assert not entry.passed, entry.to_dict()
    assert entry.rhs < 0.75 * entry.lhs


def _descent_q(push):
    def project(y: np.ndarray) -> np.ndarray:
        x = push(y)
        inv = invariants_batch(x[:, :4].reshape(-1, 2, 2), x[:, 4:].reshape(-1, 2, 2))
        # 分裂或橢圓皆有 u + v = Q
        return (inv["u"] + inv["v"]).real[:, None]

    return project


def _agree(a, a_err, b, b_err):
    sigma = np.hypot(a_err, b_err)
    dev = np.abs(a - b)
    assert np.all(dev <= 5.0 * sigma + 1e-12)
    assert np.mean(dev <= 3.0 * sigma + 1e-12) >= 0.9


def test_psi_pushforward_matches_mean_function_1_1(small_mc):
    f = gaussian(2, half_width=3.0)
    edges = uniform_edges(-9.0, 9.0, 36)
    direct = mean_density(Signature(1, 1), f, edges, 200_000, seed=21)
    pushed = pushforward(f, [edges], _descent_q(descent_psi_batch), 200_000, seed=22)
    _agree(direct.density, direct.stderr, pushed.density, pushed.stderr)


def test_psi3_pushforward_matches_mean_function_2_1(small_mc):
    # Q∘ψ₃ = 2Q_{2,1}：q 上的密度在 2t 處等於 M_{Q_{2,1}} f(t)/2
    f = gaussian(3, half_width=2.5)
    edges = uniform_edges(-6.5, 12.5, 38)
    direct = mean_density(Signature(2, 1), f, edges, 200_000, seed=23)
    pushed = pushforward(f, [2.0 * edges], _descent_q(descent_psi3_batch), 200_000, seed=24)
    _agree(direct.density, direct.stderr, 2.0 * pushed.density, 2.0 * pushed.stderr)

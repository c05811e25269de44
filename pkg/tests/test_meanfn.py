"""
平均值函數測試：η、係數公式、亂數流、分箱與擬合
"""

import math

import numpy as np
import pytest
from scipy import integrate, special

from app.errors import GridMiss, ZeroArgument
from app.meanfn import (
    DensityGrid,
    Signature,
    coefficient_check,
    eta,
    eta_array,
    fit_sampled_profile,
    gaussian,
    log_eta,
    mean_density,
    parallel_map,
    predicted_coefficient,
    singular_fit,
    split_jobs,
    stream,
    uniform_edges,
)
from app.meanfn.fit import default_side, fit_edges


@pytest.mark.parametrize(
    "p, q, t, expected",
    [
        (2, 1, -4.0, 2.0),
        (2, 1, 4.0, 0.0),
        (1, 2, 4.0, 2.0),
        (1, 2, -4.0, 0.0),
        (2, 2, -3.0, 1.5),
        (2, 2, 3.0, 1.5),
        (4, 4, -2.0, 4.0),
        (4, 4, 2.0, 4.0),
        (2, 4, -2.0, -2.0),
        (1, 1, math.e, 1.0),
        (1, 1, -math.e, 1.0),
    ],
)
def test_eta_by_parity(p, q, t, expected):
    assert eta(Signature(p, q), t) == pytest.approx(expected)


def test_eta_odd_odd_sign():
    # n = 4，e = 1：sign(t)·|t|·log|t|
    sig = Signature(3, 1)
    t = np.array([-math.e, math.e])
    np.testing.assert_allclose(eta_array(sig, t), [-math.e, math.e])


def test_eta_rejects_zero():
    with pytest.raises(ZeroArgument):
        eta(Signature(1, 1), 0.0)


def test_signature_validation():
    with pytest.raises(ValueError):
        Signature(0, 2)


def test_predicted_coefficient_log_case():
    assert predicted_coefficient(Signature(1, 1), 0, 1.0) == pytest.approx(-1.0)


def test_predicted_coefficient_scales_with_k():
    sig = Signature(2, 2)
    c0 = predicted_coefficient(sig, 0, 1.0)
    c1 = predicted_coefficient(sig, 1, 1.0)
    assert c1 / c0 == pytest.approx(1.0 / (4.0 * 2.0))


def test_split_jobs():
    assert split_jobs(250, 100) == [100, 100, 50]
    assert split_jobs(200, 100) == [100, 100]
    assert split_jobs(0, 100) == []


def test_stream_is_reproducible():
    a = stream(7, 3).random(5)
    b = stream(7, 3).random(5)
    c = stream(7, 4).random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_parallel_map_keeps_order():
    items = list(range(20))
    assert parallel_map(lambda x: x * x, items, n_threads=4) == [x * x for x in items]


def test_mean_density_independent_of_threads():
    sig, f = Signature(1, 1), gaussian(2, half_width=4.0)
    edges = uniform_edges(-16.0, 16.0, 64)
    one = mean_density(sig, f, edges, 40_000, seed=5, n_threads=1, batch_size=10_000)
    many = mean_density(sig, f, edges, 40_000, seed=5, n_threads=4, batch_size=10_000)
    np.testing.assert_array_equal(one.sum_w, many.sum_w)
    np.testing.assert_array_equal(one.count, many.count)


def test_total_mass_matches_integral():
    sig, f = Signature(1, 1), gaussian(2, half_width=4.0)
    grid = mean_density(sig, f, uniform_edges(-16.0, 16.0, 64), 200_000, seed=1)
    mean, err = grid.integral()
    assert abs(mean - math.pi) < 5 * err
    assert grid.mass() == pytest.approx(mean, rel=1e-9)


def test_k0_density():
    sig, f = Signature(1, 1), gaussian(2, half_width=5.0)
    edges = np.concatenate([[-25.0], np.linspace(-2.0, 2.0, 21), [25.0]])
    grid = mean_density(sig, f, edges, 400_000, seed=11)
    lo, hi = edges[1:-2], edges[2:-1]
    inner = grid.density[1:-1]
    inner_err = grid.stderr[1:-1]
    keep = (np.minimum(np.abs(lo), np.abs(hi)) > 0.1) & (np.sign(lo) == np.sign(hi))
    oracle = np.array([integrate.quad(lambda t: special.k0(abs(t)), a, b)[0] / (b - a) for a, b in zip(lo, hi)])
    within = np.abs(inner - oracle)[keep] <= 4.0 * inner_err[keep]
    assert np.mean(within) >= 0.9


def test_grid_miss():
    sig, f = Signature(1, 1), gaussian(2, half_width=4.0)
    with pytest.raises(GridMiss):
        mean_density(sig, f, uniform_edges(0.5, 1.0, 5), 10_000, seed=0)


def test_merge_requires_same_edges():
    a = DensityGrid.empty([uniform_edges(0.0, 1.0, 4)])
    b = DensityGrid.empty([uniform_edges(0.0, 2.0, 4)])
    with pytest.raises(ValueError):
        a.merge(b)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        mean_density(Signature(2, 1), gaussian(2), uniform_edges(-1.0, 1.0, 4), 100, seed=0)


def test_fit_sampled_profile_is_exact_on_model():
    t = np.geomspace(1e-3, 1e-1, 20)
    values = 2.0 + 3.0 * np.log(t) + 0.5 * t
    fit = fit_sampled_profile(t, values, log_eta, degree=1)
    assert fit.phi0_limit == pytest.approx(2.0, abs=1e-9)
    assert fit.phi1_limit == pytest.approx(3.0, abs=1e-9)
    assert fit.a[1] == pytest.approx(0.5, abs=1e-6)


def test_fit_sampled_profile_complex():
    t = -np.geomspace(1e-3, 1e-1, 20)
    values = (1.0 - 2.0j) + (0.5 + 0.25j) * np.log(np.abs(t))
    fit = fit_sampled_profile(t, values, log_eta, degree=1)
    assert abs(complex(fit.a[0]) - (1.0 - 2.0j)) < 1e-9
    assert abs(complex(fit.b[0]) - (0.5 + 0.25j)) < 1e-9


def _exact_grid(profile, edges, n: int = 10**6) -> DensityGrid:
    """以精確的箱內平均建網格，標準誤差約為密度的 10⁻⁶"""
    widths = np.diff(edges)
    dens = np.array([
        integrate.quad(profile, a, b, points=[0.0] if a < 0 < b else None)[0] / (b - a)
        for a, b in zip(edges[:-1], edges[1:])
    ])
    mean = dens * widths
    return DensityGrid([edges], n * mean, n * mean**2 * (1 + 1e-6), np.full(len(dens), n), n_samples=n)


def test_even_even_fits_are_two_sided():
    assert default_side(Signature(2, 2)) == "both"
    assert default_side(Signature(2, 1)) == "left"
    assert default_side(Signature(1, 1)) == "right"


def test_singular_fit_recovers_kink_2_2():
    # Gauss 函數在 Q_{2,2} 下：(π²/2)e^{−|t|}，φ₁(0) = −π²
    edges = fit_edges(0.01, 0.6, 24, 5.0)
    grid = _exact_grid(lambda t: 0.5 * math.pi**2 * math.exp(-abs(t)), edges)
    fit = singular_fit(grid, Signature(2, 2), "both", 0.01, 0.6, degree=3)
    assert fit.phi0_limit == pytest.approx(0.5 * math.pi**2, rel=1e-3)
    assert fit.phi1_limit == pytest.approx(predicted_coefficient(Signature(2, 2), 0, 1.0), rel=1e-2)
    assert fit.phi1_limit == pytest.approx(-math.pi**2, rel=1e-2)


def test_singular_fit_recovers_kink_4_4():
    # Q_{4,4}：(π⁴/4)e^{−|t|}(1 + |t|) = (π⁴/4)(1 − t²/2 + |t|³/3 + …)，φ₁(0) = π⁴/6
    edges = fit_edges(0.01, 0.6, 24, 5.0)
    grid = _exact_grid(lambda t: 0.25 * math.pi**4 * math.exp(-abs(t)) * (1 + abs(t)), edges)
    fit = singular_fit(grid, Signature(4, 4), "both", 0.01, 0.6, degree=4)
    assert fit.phi1_limit == pytest.approx(predicted_coefficient(Signature(4, 4), 0, 1.0), rel=1e-2)
    assert fit.phi1_limit == pytest.approx(math.pi**4 / 6, rel=1e-2)


def test_coefficient_check_2_2_from_samples():
    check = coefficient_check(gaussian(4, half_width=2.5), Signature(2, 2), 0, 4_000_000, seed=9,
                              t_min=0.02, t_max=0.8, n_per_side=16, degree=2)
    assert check.side == "both"
    assert check.predicted == pytest.approx(-math.pi**2)
    assert abs(check.measured - check.predicted) <= 0.15 * abs(check.predicted), check.to_dict()

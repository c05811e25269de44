"""
Dunkl 算子測試：交換性、移位恆等式與徑向算子
"""

from fractions import Fraction

import numpy as np
import pytest

from app.algebra import CartanClass
from app.dunkl import (
    PAIR_K,
    ROOTS,
    BivariatePolynomial,
    MultiplicityFunction,
    delta_polynomial,
    dunkl_apply,
    dunkl_commutator,
    dunkl_value,
    opdam_check,
    opdam_exact,
    power_sum,
    product_sum,
    radial_apply,
    radial_q_s,
    require_invariant,
    wall_distance,
)
from app.errors import NotInvariant
from app.meanfn import stream
from app.verify import chamber_points

E1_SQ_PLUS_E2_SQ = BivariatePolynomial({(2, 0): 1, (0, 2): 1})


def test_weyl_group_has_eight_elements():
    group = ROOTS.weyl_group()
    assert len(group) == 8
    assert np.array_equal(group[0], np.eye(2, dtype=int))


def test_multiplicity_must_be_invariant():
    with pytest.raises(ValueError):
        MultiplicityFunction(Fraction(1, 2), Fraction(1, 3), 1, 1)
    assert PAIR_K.one_minus() == MultiplicityFunction.of(Fraction(1, 2), 0)


def test_dunkl_on_linear_function():
    # 每個 α(e₁) ≠ 0 的根貢獻 k_α·α(e₁)
    p = BivariatePolynomial.x1()
    out = dunkl_apply((1, 0), PAIR_K, p)
    assert out == BivariatePolynomial.one() * (1 + 2 * Fraction(1, 2) + 1 + 1)


@pytest.mark.parametrize("k", [PAIR_K, MultiplicityFunction.of(Fraction(1, 3), Fraction(2, 5))])
def test_dunkl_operators_commute(k):
    rng = stream(3, 0)
    for _ in range(30):
        p = BivariatePolynomial.random(rng, int(rng.integers(0, 7)))
        assert dunkl_commutator(k, p).is_zero()


def test_shift_identity_is_exact():
    rng = stream(4, 0)
    for _ in range(10):
        p = BivariatePolynomial.random_invariant(rng, int(rng.integers(0, 9)))
        for selector in ("Q", "S"):
            assert opdam_exact(selector, p).is_zero()


def test_dunkl_laplacian_of_power_sum():
    # Δ_k|x|² = 2(N + 2Σk_α) = 16
    assert radial_q_s("k", "Q", E1_SQ_PLUS_E2_SQ) == BivariatePolynomial.one() * 16


def test_radial_q_s_routes_agree():
    rng = stream(5, 0)
    p = BivariatePolynomial.random_invariant(rng, 6)
    for selector in ("Q", "S"):
        assert radial_q_s("k", selector, p) == radial_q_s("one_minus_k", selector, p)


def test_require_invariant():
    require_invariant(delta_polynomial() * delta_polynomial())
    with pytest.raises(NotInvariant):
        require_invariant(BivariatePolynomial.x1())
    with pytest.raises(NotInvariant):
        require_invariant(delta_polynomial())


def test_dunkl_value_matches_exact_polynomial():
    point = (1.1, 0.4)
    for selector in ("Q", "S"):
        exact = radial_q_s("k", selector, E1_SQ_PLUS_E2_SQ * E1_SQ_PLUS_E2_SQ)
        value = dunkl_value(selector, PAIR_K, lambda a, b: (a * a + b * b) ** 2, point)
        assert value == pytest.approx(complex(exact.evaluate(*point)), abs=1e-10)


def test_opdam_check_on_power_sum():
    points = chamber_points(CartanClass.APP, stream(6, 0), 4, lo=0.35, hi=1.8)
    for selector in ("Q", "S"):
        report = opdam_check(selector, PAIR_K, power_sum(), points)
        assert report.max_relative_residual < 1e-6


def test_opdam_check_eigenfunction(lambdas):
    f = product_sum(*lambdas)
    points = chamber_points(CartanClass.APP, stream(7, 0), 3, lo=0.35, hi=1.8)
    report = opdam_check("Q", PAIR_K, f, points, eigen=f.eigen("Q"))
    scale = 1.0 + max(abs(report.eigen * p.value) for p in report.points)
    assert report.max_relative_residual < 1e-6
    assert report.max_eigen_residual_shifted / scale < 1e-6


def test_chamber_points_stay_off_walls():
    for cls in CartanClass:
        for point in chamber_points(cls, stream(8, 0), 5):
            assert wall_distance(cls, point) > 0


@pytest.mark.parametrize(
    "cls, q_fn",
    [
        (CartanClass.APP, lambda a, b: a * a + b * b),
        (CartanClass.APM, lambda a, b: a * a - b * b),
        (CartanClass.A2, lambda t, th: 2.0 * (t * t - th * th)),
    ],
)
def test_radial_q_constant(cls, q_fn):
    for point in chamber_points(cls, stream(9, 0), 3):
        assert radial_apply(cls, "Q", q_fn, point).value == pytest.approx(16.0, rel=1e-6)

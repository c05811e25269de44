"""
jet 算術與常係數算子 ∂(P) 的測試
"""

import math

import numpy as np
import pytest

from app.algebra import CartanClass, canonical_element, random_block
from app.algebra.block import BlockVector
from app.eigendist import (
    OPERATORS,
    InvariantPolynomial,
    Jet,
    TestFunctionJet,
    character_value,
    monomials,
    partial_P,
    partial_P_batch,
)


def test_polynomial_and_exp_derivatives():
    x1, x2 = Jet.variables([0.5, 2.0], 3)
    f = x1 * x1 * x2 + x1.exp()
    e = math.exp(0.5)
    assert f.value == pytest.approx(0.5 + e)
    assert f.derivative((1, 0)) == pytest.approx(2.0 + e)
    assert f.derivative((0, 1)) == pytest.approx(0.25)
    assert f.derivative((2, 1)) == pytest.approx(2.0)
    assert f.derivative((3, 0)) == pytest.approx(e)
    assert f.derivative((0, 2)) == pytest.approx(0.0)


def test_reciprocal_log_and_power():
    (x,) = Jet.variables([2.0], 4)
    inv = 1.0 / x
    assert inv.derivative((3,)) == pytest.approx(-6.0 / 2.0**4)
    lg = x.log()
    assert lg.derivative((2,)) == pytest.approx(-0.25)
    root = x.sqrt()
    assert root.derivative((1,)) == pytest.approx(0.5 / math.sqrt(2.0))
    with pytest.raises(ZeroDivisionError):
        Jet.variables([0.0], 2)[0].reciprocal()


def test_partial_and_truncate():
    x1, x2 = Jet.variables([1.0, -1.0], 3)
    f = x1**3 * x2
    d1 = f.partial(0)
    assert d1.order == 2
    assert d1.value == pytest.approx(-3.0)
    assert d1.derivative((1, 0)) == pytest.approx(-6.0)
    assert f.truncate(1).derivative((0, 1)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        f.truncate(4)


def test_linear_substitute_swaps_variables():
    x1, x2 = Jet.variables([0.0, 0.0], 2)
    f = x1 * 3.0 + x2 * x2
    swapped = f.linear_substitute(np.array([[0, 1], [1, 0]]))
    assert swapped.derivative((0, 1)) == pytest.approx(3.0)
    assert swapped.derivative((2, 0)) == pytest.approx(2.0)


def test_mismatched_jets():
    a = Jet.variables([0.0, 0.0], 2)[0]
    b = Jet.variables([0.0, 0.0, 0.0], 2)[0]
    with pytest.raises(ValueError):
        a + b


def test_invariant_constants(rng):
    for _ in range(5):
        X = random_block(rng)
        assert complex(OPERATORS["Q"].apply(InvariantPolynomial("Q").jet(X, 2))) == pytest.approx(16.0)
        assert complex(OPERATORS["S"].apply(InvariantPolynomial("S").jet(X, 4))) == pytest.approx(64.0)


def test_character_value(lambdas):
    lam1, lam2 = lambdas
    assert character_value("Q", lam1, lam2) == lam1 + lam2
    assert character_value("S", lam1, lam2) == lam1 * lam2
    assert character_value("S0", lam1, lam2) == (lam1 - lam2) ** 2
    with pytest.raises(ValueError):
        character_value("T", lam1, lam2)


@pytest.mark.parametrize("P", ["Q", "S", "S0"])
def test_partial_P_closed_form_matches_jets(P, rng):
    f = TestFunctionJet(canonical_element(CartanClass.APP, (1.6, 0.5)).to_vector(), 0.3, name="bump")
    x = f.sample(rng, 6)
    closed = partial_P_batch(P, f, x)
    via_jets = np.array([partial_P(P, f, BlockVector.from_vector(row)) for row in x])
    np.testing.assert_allclose(closed, via_jets, rtol=1e-8, atol=1e-8 * np.max(np.abs(via_jets)))


def test_partial_P_vanishes_outside_support():
    f = TestFunctionJet(np.zeros(8), 0.3)
    X = BlockVector.from_vector(np.full(8, 1.0))
    assert partial_P("Q", f, X) == 0.0
    with pytest.raises(ValueError):
        partial_P("T", f, X)


def test_monomials_evaluate_jet_as_polynomial(rng):
    x1, x2 = Jet.variables([0.0, 0.0], 3)
    p = x1 * x1 * x2 * 2.0 + x2 * 3.0 + 1.0
    d = rng.normal(size=(5, 2))
    expected = 2.0 * d[:, 0] ** 2 * d[:, 1] + 3.0 * d[:, 1] + 1.0
    np.testing.assert_allclose(p.evaluate_offsets(d), expected, rtol=1e-12)
    assert monomials(d, 2).shape == (5, 6)


def test_apply_polynomial_on_cubic():
    # ∂(Q) 作用在 3 次多項式得到 1 次多項式，∂(S) 則為 0
    coords = Jet.variables(np.zeros(8), 3)
    y11, z11 = coords[0], coords[4]
    p = y11 * z11 * coords[1] + y11 * z11
    out = OPERATORS["Q"].apply_polynomial(p)
    assert out.order == 1
    assert complex(out.value) == pytest.approx(4.0)
    assert complex(out.derivative((0, 1, 0, 0, 0, 0, 0, 0))) == pytest.approx(4.0)
    assert OPERATORS["S"].apply_polynomial(p) is None

"""
代數核心測試：H 作用、不變量、分類與標準形
"""

import numpy as np
import pytest

from app.algebra import (
    BlockVector,
    CartanClass,
    HElement,
    adjoint,
    adjoint_matrix,
    canonical_element,
    classify,
    involution,
    invariants,
    normal_form,
    random_block,
    random_h,
    spectral_values,
    varpi_conjugator,
)
from app.algebra.invariants import invariants_batch
from app.errors import NotRegular, SingularH


def test_invariants_of_cartan_element():
    inv = invariants(canonical_element(CartanClass.APP, (2.0, 1.0)))
    assert inv.to_dict() == {"Q": 5.0, "S": 4.0, "S0": 9.0, "delta": 3.0, "u": 4.0, "v": 1.0}


def test_invariants_preserved_by_h(rng):
    for _ in range(200):
        h, X = random_h(rng), random_block(rng)
        a, b = invariants(X), invariants(adjoint(h, X))
        for x, y in ((a.Q, b.Q), (a.S, b.S), (a.S0, b.S0), (a.u, b.u), (a.v, b.v)):
            assert abs(x - y) <= 1e-10 * max(1.0, abs(x))


def test_batch_matches_scalar(rng):
    x = rng.uniform(-1, 1, size=(50, 8))
    batch = invariants_batch(x[:, :4].reshape(-1, 2, 2), x[:, 4:].reshape(-1, 2, 2))
    for i in range(50):
        inv = invariants(BlockVector.from_vector(x[i]))
        assert batch["Q"][i] == pytest.approx(inv.Q, abs=1e-12)
        assert batch["S"][i] == pytest.approx(inv.S, abs=1e-12)
        assert complex(batch["u"][i]) == pytest.approx(inv.u, abs=1e-10)


def test_adjoint_matrix_is_linear_action(rng):
    h, X = random_h(rng), random_block(rng)
    np.testing.assert_allclose(adjoint_matrix(h) @ X.to_vector(), adjoint(h, X).to_vector(), atol=1e-12)


def test_singular_h_rejected():
    h = HElement(np.array([[1.0, 2.0], [2.0, 4.0]]), np.eye(2))
    with pytest.raises(SingularH):
        adjoint(h, BlockVector.zero())


def test_zero_is_nilpotent():
    out = classify(BlockVector.zero()).to_dict()
    assert out["class"] == "Nilpotent"
    assert out["in_U"] is False


def test_regular_flags():
    cl = classify(canonical_element(CartanClass.APP, (2.0, 1.0)))
    assert cl.regularity.value == "Regular"
    assert cl.flags.in_U and cl.flags.in_Um and cl.flags.in_U3


def test_varpi_swaps_a2_parameters():
    tau, theta = 1.1, 0.4
    lhs = involution(canonical_element(CartanClass.A2, (tau, theta)), "varpi")
    rhs = adjoint(varpi_conjugator(), canonical_element(CartanClass.A2, (theta, tau)))
    np.testing.assert_allclose(lhs.to_vector(), rhs.to_vector(), atol=1e-12)


@pytest.mark.parametrize("cls,params", [
    (CartanClass.APP, (2.0, 1.0)),
    (CartanClass.APM, (1.5, 0.7)),
    (CartanClass.AMM, (1.0, 2.0)),
    (CartanClass.A2, (1.2, 0.5)),
])
def test_normal_form_of_conjugated_element(rng, cls, params):
    X = adjoint(random_h(rng), canonical_element(cls, params))
    nf = normal_form(X)
    assert nf.cartan_class is cls
    got = sorted(spectral_values(nf.cartan_class, nf.params), key=lambda z: (z.real, z.imag))
    want = sorted(spectral_values(cls, params), key=lambda z: (z.real, z.imag))
    np.testing.assert_allclose(got, want, rtol=1e-8)
    image = adjoint(nf.h, X)
    np.testing.assert_allclose(image.to_vector(), canonical_element(nf.cartan_class, nf.params).to_vector(),
                               atol=1e-8)


def test_normal_form_round_trip_random(rng):
    done = 0
    while done < 100:
        X = random_block(rng)
        inv = invariants(X)
        if abs(inv.S * inv.S0) < 1e-4:
            continue
        nf = normal_form(X)
        image = adjoint(nf.h, X)
        np.testing.assert_allclose(image.to_vector(), canonical_element(nf.cartan_class, nf.params).to_vector(),
                                   atol=1e-8 * max(1.0, X.norm()))
        if inv.S0 < 0:
            assert nf.cartan_class is CartanClass.A2
        done += 1


def test_normal_form_rejects_non_regular():
    with pytest.raises(NotRegular):
        normal_form(canonical_element(CartanClass.APP, (1.0, 1.0)))

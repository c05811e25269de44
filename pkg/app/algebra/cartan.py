"""
Cartan 子空間
四個共軛類的代表元、根與 Weyl 群，以及正則元素的標準形
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from app.algebra.block import BlockVector, HElement, adjoint
from app.algebra.classify import RegularityClass, classify
from app.algebra.invariants import invariants
from app.config import settings
from app.errors import IllConditioned, NotRegular

logger = logging.getLogger(__name__)


class CartanClass(str, enum.Enum):
    APP = "APP"
    APM = "APM"
    AMM = "AMM"
    A2 = "A2"


KAPPA = np.array([[0.0, 1.0], [1.0, 0.0]])
RHO = np.diag([1.0, -1.0])
I2 = np.eye(2)


def rotation_block(tau: float, theta: float) -> np.ndarray:
    return np.array([[tau, -theta], [theta, tau]])


def canonical_element(cls: CartanClass, params) -> BlockVector:
    p1, p2 = (float(p) for p in params)
    if cls is CartanClass.APP:
        return BlockVector(np.diag([p1, p2]), np.diag([p1, p2]))
    if cls is CartanClass.APM:
        return BlockVector(np.diag([p1, p2]), np.diag([p1, -p2]))
    if cls is CartanClass.AMM:
        return BlockVector(np.diag([p1, p2]), np.diag([-p1, -p2]))
    M = rotation_block(p1, p2)
    return BlockVector(M, M.copy())


def spectral_values(cls: CartanClass, params) -> tuple[complex, complex]:
    """Cartan 元素的 (u, v)，即 YZ 的特徵值"""
    p1, p2 = (float(p) for p in params)
    if cls is CartanClass.APP:
        return complex(p1 * p1), complex(p2 * p2)
    if cls is CartanClass.APM:
        return complex(p1 * p1), complex(-p2 * p2)
    if cls is CartanClass.AMM:
        return complex(-p1 * p1), complex(-p2 * p2)
    z = complex(p1, p2) ** 2
    return z, z.conjugate()


@dataclass(frozen=True)
class Root:
    name: str
    # 線性泛函 α(p) = c1·p1 + c2·p2
    coefficients: tuple[complex, complex]
    multiplicity: int

    def __call__(self, params) -> complex:
        return self.coefficients[0] * params[0] + self.coefficients[1] * params[1]


@dataclass(frozen=True)
class CartanData:
    cartan_class: CartanClass
    roots: tuple[Root, ...]
    weyl_group: tuple[HElement, ...]

    def to_dict(self) -> dict:
        def enc(z: complex):
            return {"re": z.real, "im": z.imag}

        return {
            "class": self.cartan_class.value,
            "roots": [
                {"name": r.name, "coefficients": [enc(c) for c in r.coefficients], "multiplicity": r.multiplicity}
                for r in self.roots
            ],
            "weyl_order": len(self.weyl_group),
            "weyl_group": [h.to_dict() for h in self.weyl_group],
        }


_ALPHA = {
    CartanClass.APP: ((2, 0), (0, 2)),
    CartanClass.APM: ((2, 0), (0, 2j)),
    CartanClass.AMM: ((2j, 0), (0, 2j)),
    CartanClass.A2: ((2, 2j), (2, -2j)),
}


def _signed(elements: list[tuple[np.ndarray, np.ndarray]]) -> tuple[HElement, ...]:
    # −g 由 (A, −B) 實現，在 q 上作用為 −Ad(g)
    out = []
    for A, B in elements:
        out.append(HElement(A, B))
        out.append(HElement(A, -B))
    return tuple(out)


def cartan_data(cls: CartanClass) -> CartanData:
    a1, a2 = (tuple(complex(c) for c in coeffs) for coeffs in _ALPHA[cls])
    b1 = tuple((x - y) / 2 for x, y in zip(a1, a2))
    b2 = tuple((x + y) / 2 for x, y in zip(a1, a2))
    roots = (
        Root("alpha1", a1, 1),
        Root("alpha2", a2, 1),
        Root("beta1", b1, 2),
        Root("beta2", b2, 2),
    )
    if cls in (CartanClass.APP, CartanClass.AMM):
        gens = [(I2, I2), (KAPPA, KAPPA), (RHO, I2), (KAPPA @ RHO, KAPPA)]
    elif cls is CartanClass.APM:
        gens = [(I2, I2), (RHO, I2)]
    else:
        gens = [(I2, I2), (KAPPA, KAPPA)]
    return CartanData(cls, roots, _signed(gens))


def cartan_projection_defect(cls: CartanClass, X: BlockVector) -> float:
    """X 到標準 Cartan 子空間的距離"""
    e1 = canonical_element(cls, (1.0, 0.0)).to_vector()
    e2 = canonical_element(cls, (0.0, 1.0)).to_vector()
    basis = np.stack([e1, e2], axis=1)
    x = X.to_vector()
    coef, *_ = np.linalg.lstsq(basis, x, rcond=None)
    return float(np.linalg.norm(basis @ coef - x))


def cartan_coordinates(cls: CartanClass, X: BlockVector) -> tuple[float, float]:
    e1 = canonical_element(cls, (1.0, 0.0)).to_vector()
    e2 = canonical_element(cls, (0.0, 1.0)).to_vector()
    basis = np.stack([e1, e2], axis=1)
    coef, *_ = np.linalg.lstsq(basis, X.to_vector(), rcond=None)
    return float(coef[0]), float(coef[1])


def weyl_orbit(cls: CartanClass, params) -> list[tuple[float, float]]:
    """Cartan 元素在 Weyl 群下的所有像（參數形式）"""
    X = canonical_element(cls, params)
    return [cartan_coordinates(cls, adjoint(w, X)) for w in cartan_data(cls).weyl_group]


def varpi_conjugator() -> HElement:
    """h₀ 使 ϖ(X_{τ,θ}) = h₀·X_{θ,τ}"""
    return HElement(KAPPA, RHO)


@dataclass(frozen=True)
class NormalForm:
    cartan_class: CartanClass
    params: tuple[float, float]
    h: HElement

    def to_dict(self) -> dict:
        return {"class": self.cartan_class.value, "params": list(self.params), "h": self.h.to_dict()}


def _eigenvector(C: np.ndarray, mu: complex) -> np.ndarray:
    # (C − μI)v = 0 的兩個候選，取範數較大者
    c1 = np.array([C[0, 1], mu - C[0, 0]], dtype=complex)
    c2 = np.array([mu - C[1, 1], C[1, 0]], dtype=complex)
    return c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2


def _condition_guard(V: np.ndarray, cap: float) -> None:
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > cap:
        raise IllConditioned(f"特徵向量矩陣條件數 {cond:.3e} 超過上限 {cap:.1e}")


def normal_form(X: BlockVector, tol: float | None = None, max_condition: float | None = None) -> NormalForm:
    """回傳 (類別, 參數, h)，使 h·X 等於標準 Cartan 元素"""
    tol = settings.tol_regular if tol is None else tol
    cap = settings.max_condition if max_condition is None else max_condition
    cl = classify(X, tol)
    if cl.regularity is not RegularityClass.REGULAR:
        raise NotRegular(f"S·S0 在容差內為 0（類別 {cl.regularity.value}）")
    inv = invariants(X)
    C = X.Y @ X.Z

    if inv.S0 > 0:
        u, v = inv.u.real, inv.v.real
        w_u = _eigenvector(C, u).real
        w_v = _eigenvector(C, v).real
        V = np.stack([w_u, w_v], axis=1)
        _condition_guard(V, cap)
        P = np.linalg.inv(V)
        D = np.diag([np.sqrt(abs(u)), np.sqrt(abs(v))])
        B = np.linalg.inv(D) @ P @ X.Y
        h = HElement(P, B)
        if u > 0 and v > 0:
            cls = CartanClass.APP
        elif u < 0 and v < 0:
            cls = CartanClass.AMM
        else:
            cls = CartanClass.APM
        params = (float(D[0, 0]), float(D[1, 1]))
    else:
        a, b = inv.u.real, inv.u.imag
        w = _eigenvector(C, inv.u)
        V = np.stack([w.real, -w.imag], axis=1)
        _condition_guard(V, cap)
        P = np.linalg.inv(V)
        zeta = np.sqrt(complex(a, b))
        M = rotation_block(zeta.real, zeta.imag)
        B = np.linalg.inv(M) @ P @ X.Y
        h = HElement(P, B)
        cls = CartanClass.A2
        params = (float(zeta.real), float(zeta.imag))

    logger.debug(f"標準形: {cls.value} {params}")
    return NormalForm(cls, params, h)

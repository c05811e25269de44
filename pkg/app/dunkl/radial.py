"""
Cartan 子空間上的徑向算子
以四階中心差分與 Richardson 外插評估 δ⁻¹∘(L_{α₁} ± L_{α₂})∘δ 等算子
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from app.algebra.cartan import CartanClass, cartan_data
from app.config import settings
from app.errors import StencilCrossesWall

logger = logging.getLogger(__name__)

Operator = Literal["Q", "S", "S0"]
PointFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
CoefFn = Callable[[complex, complex], complex]

# 七點格上的四階中心差分權重（偏移 −3..3）
STENCILS = {
    0: np.array([0, 0, 0, 1, 0, 0, 0], dtype=float),
    1: np.array([0, 1, -8, 0, 8, -1, 0], dtype=float) / 12.0,
    2: np.array([0, -1, 16, -30, 16, -1, 0], dtype=float) / 12.0,
    3: np.array([1, -8, 13, 0, -13, 8, -1], dtype=float) / 8.0,
    4: np.array([-1, 12, -39, 56, -39, 12, -1], dtype=float) / 6.0,
}
OFFSETS = np.arange(-3, 4, dtype=float)
STENCIL_REACH = 3


@dataclass(frozen=True)
class FDValue:
    value: complex
    error: float

    def to_dict(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag, "error": self.error}


@dataclass(frozen=True)
class RadialOperator:
    """Σ c(p)·∂^{(a,b)}，偏導數取在實參數 (p₁, p₂) 上"""

    name: str
    terms: tuple[tuple[Callable[[float, float], complex], tuple[int, int]], ...]

    @property
    def order(self) -> int:
        return max(a + b for _, (a, b) in self.terms)

    def _grid(self, G: PointFn, point, h: float) -> np.ndarray:
        p1, p2 = point
        P1, P2 = np.meshgrid(p1 + OFFSETS * h, p2 + OFFSETS * h, indexing="ij")
        return np.asarray(G(P1, P2), dtype=complex).reshape(7, 7)

    def apply_once(self, G: PointFn, point, h: float) -> complex:
        values = self._grid(G, point, h)
        total = 0j
        cache: dict[tuple[int, int], complex] = {}
        for coef, (a, b) in self.terms:
            if (a, b) not in cache:
                cache[(a, b)] = complex(STENCILS[a] @ values @ STENCILS[b]) / h ** (a + b)
            total += coef(*point) * cache[(a, b)]
        return total

    def apply(self, G: PointFn, point, h: float) -> FDValue:
        """h 與 h/2 兩次評估的 Richardson 組合，誤差取兩者之差"""
        coarse = self.apply_once(G, point, h)
        fine = self.apply_once(G, point, h / 2)
        return FDValue((16.0 * fine - coarse) / 15.0, abs(fine - coarse))


def _l_squared(w: float, which: int) -> list[tuple[CoefFn, tuple[int, int]]]:
    """(±L)² = L²，L = ∂² + (w/z)∂"""
    def e(k):
        return (k, 0) if which == 0 else (0, k)

    def z(z1, z2):
        return z1 if which == 0 else z2

    return [
        (lambda z1, z2: 1.0, e(4)),
        (lambda z1, z2: 2 * w / z(z1, z2), e(3)),
        (lambda z1, z2: (w * w - 2 * w) / z(z1, z2) ** 2, e(2)),
        (lambda z1, z2: (2 * w - w * w) / z(z1, z2) ** 3, e(1)),
    ]


def abstract_template(op: Operator, signs=(1, 1), weights=(1.0, 1.0)) -> list[tuple[CoefFn, tuple[int, int]]]:
    """以抽象導數 ∂₁、∂₂ 與座標 z₁、z₂ 表示的算子"""
    s1, s2 = signs
    w1, w2 = weights
    q_terms = [
        (lambda z1, z2: s1, (2, 0)),
        (lambda z1, z2: s1 * w1 / z1, (1, 0)),
        (lambda z1, z2: s2, (0, 2)),
        (lambda z1, z2: s2 * w2 / z2, (0, 1)),
    ]
    s_terms = [
        (lambda z1, z2: s1 * s2, (2, 2)),
        (lambda z1, z2: s1 * s2 * w2 / z2, (2, 1)),
        (lambda z1, z2: s1 * s2 * w1 / z1, (1, 2)),
        (lambda z1, z2: s1 * s2 * w1 * w2 / (z1 * z2), (1, 1)),
    ]
    if op == "Q":
        return q_terms
    if op == "S":
        return s_terms
    if op == "S0":
        cross = [(lambda z1, z2, c=c: -2.0 * c(z1, z2), e) for c, e in s_terms]
        return _l_squared(w1, 0) + _l_squared(w2, 1) + cross
    raise ValueError(f"未知算子 {op}")


def _complex_expansion(a: int, b: int) -> dict[tuple[int, int], complex]:
    """∂_ζ^a ∂_ζ̄^b 以 ∂τ、∂θ 展開，∂_ζ = ½(∂τ − i∂θ)"""
    out: dict[tuple[int, int], complex] = {}
    for j in range(a + 1):
        for k in range(b + 1):
            c = math.comb(a, j) * math.comb(b, k) * (-1j) ** j * (1j) ** k / 2 ** (a + b)
            key = (a + b - j - k, j + k)
            out[key] = out.get(key, 0) + c
    return {key: c for key, c in out.items() if abs(c) > 0}


_SIGNS = {
    CartanClass.APP: (1, 1),
    CartanClass.APM: (1, -1),
    CartanClass.AMM: (-1, -1),
    CartanClass.A2: (1, 1),
}


def radial_operator(cartan: CartanClass, op: Operator, weights=(1.0, 1.0)) -> RadialOperator:
    cartan = CartanClass(cartan)
    template = abstract_template(op, _SIGNS[cartan], weights)
    terms = []
    if cartan is CartanClass.A2:
        for coef, (a, b) in template:
            for key, c in _complex_expansion(a, b).items():
                terms.append((lambda t, th, coef=coef, c=c: c * coef(complex(t, th), complex(t, -th)), key))
    else:
        for coef, key in template:
            terms.append((lambda p1, p2, coef=coef: coef(p1, p2), key))
    return RadialOperator(f"{op}@{cartan.value}", tuple(terms))


def dunkl_radial_operator(op: Literal["Q", "S"], k_alpha: float, k_beta: float) -> RadialOperator:
    """x 座標中 Dunkl 算子 D_p(k) 在不變函數上的徑向部分"""
    w = 2.0 * k_alpha
    if op == "S":
        if k_beta != 0:
            raise ValueError("S 的徑向部分只在 k_β = 0 時分解為 L₁L₂")
        template = abstract_template("S", (1, 1), (w, w))
        return RadialOperator(f"D_S(k_α={k_alpha})", tuple((lambda p1, p2, c=c: c(p1, p2), e) for c, e in template))
    kb = 2.0 * k_beta
    terms = [
        (lambda p1, p2: 1.0, (2, 0)),
        (lambda p1, p2: 1.0, (0, 2)),
        (lambda p1, p2: w / p1 + kb / (p1 - p2) + kb / (p1 + p2), (1, 0)),
        (lambda p1, p2: w / p2 - kb / (p1 - p2) + kb / (p1 + p2), (0, 1)),
    ]
    return RadialOperator(f"D_Q(k_α={k_alpha}, k_β={k_beta})", tuple(terms))


def delta_function(cartan: CartanClass) -> PointFn:
    """δ = u − v 在 Cartan 參數上的表示"""
    cartan = CartanClass(cartan)
    if cartan is CartanClass.APP:
        return lambda p1, p2: p1 * p1 - p2 * p2 + 0j
    if cartan is CartanClass.APM:
        return lambda p1, p2: p1 * p1 + p2 * p2 + 0j
    if cartan is CartanClass.AMM:
        return lambda p1, p2: p2 * p2 - p1 * p1 + 0j
    return lambda t, th: 4j * t * th


def wall_distance(cartan: CartanClass, point) -> float:
    """到最近根超平面（實部與虛部同時為零的集合）的距離"""
    p = np.asarray(point, dtype=float)
    best = math.inf
    for root in cartan_data(CartanClass(cartan)).roots:
        c = np.asarray(root.coefficients, dtype=complex)
        A = np.stack([c.real, c.imag])
        if np.linalg.matrix_rank(A) == 2:
            dist = float(np.linalg.norm(p))
        else:
            n = A[0] if np.any(A[0]) else A[1]
            dist = abs(float(n @ p)) / float(np.linalg.norm(n))
        best = min(best, dist)
    return best


def step_for(order: int, point) -> float:
    scale = max(abs(float(point[0])), abs(float(point[1])))
    base = settings.fd_step if order <= 2 else settings.fd_step_high
    return base * scale


def check_stencil(cartan: CartanClass, point, h: float, margin: float | None = None) -> float:
    margin = settings.chamber_margin if margin is None else margin
    dist = wall_distance(cartan, point)
    if dist - STENCIL_REACH * h < margin * h:
        raise StencilCrossesWall(
            f"點 {tuple(point)} 距根超平面 {dist:.3g}，不足 {STENCIL_REACH}h + {margin}h（h={h:.2g}）"
        )
    return dist


def radial_apply(cartan: CartanClass, which_op: Operator, F: PointFn, point, conjugated: bool = False,
                 h: float | None = None, margin: float | None = None) -> FDValue:
    """Δ_a(∂P)F(point)；conjugated=True 時 F 已是 δ·F 型，直接套用 L 型算子"""
    cartan = CartanClass(cartan)
    op = radial_operator(cartan, which_op)
    h = step_for(op.order, point) if h is None else h
    check_stencil(cartan, point, h, margin)
    if conjugated:
        return op.apply(F, point, h)
    delta = delta_function(cartan)
    raw = op.apply(lambda a, b: delta(a, b) * F(a, b), point, h)
    d0 = complex(delta(float(point[0]), float(point[1])))
    return FDValue(raw.value / d0, raw.error / abs(d0))


def radial_residual(cartan: CartanClass, which_op: Operator, F: PointFn, point, eigen: complex = 0.0,
                    conjugated: bool = False, h: float | None = None, margin: float | None = None) -> complex:
    """Δ_a(∂P)F(point) − eigen·F(point)"""
    fd = radial_apply(cartan, which_op, F, point, conjugated, h, margin)
    f0 = complex(np.asarray(F(np.array([float(point[0])]), np.array([float(point[1])])), dtype=complex).ravel()[0])
    residual = fd.value - complex(eigen) * f0
    if fd.error > 1e-4 * (abs(fd.value) + abs(f0) + 1.0):
        logger.warning(f"{which_op}@{CartanClass(cartan).value} 在 {tuple(point)} 的 Richardson 差異偏大：{fd.error:.2e}")
    return residual

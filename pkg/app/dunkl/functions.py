"""
a 上的 W 不變測試函數
同一個函數可作用於 numpy 陣列（差分側）或 Jet（Dunkl 側）
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from app.eigendist.jets import Jet
from app.specfun import Kind, SeriesSolution, check_regular_character, derivatives


def lift(sol: SeriesSolution, t):
    """sol(t)，t 可為 Jet 或陣列"""
    if isinstance(t, Jet):
        return t.compose(derivatives(sol, complex(t.value), t.order))
    return sol(t)


@dataclass(frozen=True)
class InvariantTestFunction:
    name: str
    fn: Callable
    # D_p(1−k) 與 D_p(k)∘δ⁻¹ 形式的特徵值（若已知）
    eigen_q: complex | None = None
    eigen_s: complex | None = None

    def __call__(self, x1, x2):
        return self.fn(x1, x2)

    def eigen(self, selector: str) -> complex | None:
        return self.eigen_q if selector == "Q" else self.eigen_s

    def to_dict(self) -> dict:
        return {"name": self.name}


def constant_function(c: float = 1.0) -> InvariantTestFunction:
    def fn(x1, x2):
        if isinstance(x1, Jet):
            return Jet.constant(c, x1.nvars, x1.order)
        return np.full(np.shape(x1), c, dtype=float)

    return InvariantTestFunction(f"const({c})", fn, 0.0, 0.0)


def power_sum() -> InvariantTestFunction:
    """x₁² + x₂²，即 a₊₊ 上的 Q"""
    return InvariantTestFunction("x1^2+x2^2", lambda x1, x2: x1 * x1 + x2 * x2)


def square_product() -> InvariantTestFunction:
    """x₁²x₂²"""
    return InvariantTestFunction("x1^2*x2^2", lambda x1, x2: (x1 * x1) * (x2 * x2))


def product_sum(lam1: complex, lam2: complex, kind_a: Kind = Kind.PHI, kind_b: Kind = Kind.PHI) -> InvariantTestFunction:
    """S⁺(A,B)(x₁², x₂²)；D_Q(1−k)、D_S(1−k) 的特徵函數"""
    check_regular_character(lam1, lam2)
    A, B = SeriesSolution(lam1, kind_a), SeriesSolution(lam2, kind_b)

    def fn(x1, x2):
        t1, t2 = x1 * x1, x2 * x2
        return lift(A, t1) * lift(B, t2) + lift(A, t2) * lift(B, t1)

    return InvariantTestFunction(
        f"S+({kind_a.value}_{lam1},{kind_b.value}_{lam2})", fn, complex(lam1 + lam2), complex(lam1 * lam2)
    )


def bracket_quotient(lam1: complex, lam2: complex) -> InvariantTestFunction:
    """[Φ_{λ₁},Φ_{λ₂}](x₁²,x₂²)/(x₁²−x₂²)；D_Q(k)、D_S(k) 的特徵函數"""
    check_regular_character(lam1, lam2)
    A, B = SeriesSolution(lam1, Kind.PHI), SeriesSolution(lam2, Kind.PHI)

    def fn(x1, x2):
        t1, t2 = x1 * x1, x2 * x2
        return (lift(A, t1) * lift(B, t2) - lift(A, t2) * lift(B, t1)) / (t1 - t2)

    return InvariantTestFunction(f"[Phi_{lam1},Phi_{lam2}]/delta", fn, complex(lam1 + lam2), complex(lam1 * lam2))


def invariant_polynomial_function(p) -> InvariantTestFunction:
    """BivariatePolynomial → 可作用於 Jet 的函數"""
    def fn(x1, x2):
        total = 0.0
        for (i, j), c in p.cs.items():
            total = total + (x1**i) * (x2**j) * float(c)
        return total

    return InvariantTestFunction(str(p), fn)

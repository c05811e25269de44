"""
解的組合
S⁺、[·,·]、S_{λ₁,λ₂} 與沿對角線穩定的除差括號
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from app.config import settings
from app.errors import BranchViolation, IrregularCharacter
from app.specfun.series import Kind, SeriesSolution, derivatives


def check_regular_character(lam1: complex, lam2: complex) -> None:
    if lam1 * lam2 * (lam1 - lam2) == 0:
        raise IrregularCharacter(f"λ₁λ₂(λ₁−λ₂) = 0：λ₁={lam1}, λ₂={lam2}")


@dataclass(frozen=True)
class SolutionPair:
    A: SeriesSolution
    B: SeriesSolution
    real: bool = True

    def __post_init__(self):
        check_regular_character(self.A.lam, self.B.lam)

    @property
    def lambdas(self) -> tuple[complex, complex]:
        return self.A.lam, self.B.lam


def splus(f, g, x1, x2):
    """S⁺(f,g)(x₁,x₂) = f(x₁)g(x₂) + f(x₂)g(x₁)"""
    return f(x1) * g(x2) + f(x2) * g(x1)


def bracket(f, g, x1, x2):
    """[f,g](x₁,x₂) = f(x₁)g(x₂) − f(x₂)g(x₁)"""
    return f(x1) * g(x2) - f(x2) * g(x1)


def s_lambda(lam1: complex, lam2: complex, z1, z2):
    """([Φ₁,w₂] + [w₁,Φ₂])(z₁,z₂) + log|z₁z₂|·[Φ₁,Φ₂](z₁,z₂)，與對數分支無關"""
    phi1 = SeriesSolution(lam1, Kind.PHI)
    phi2 = SeriesSolution(lam2, Kind.PHI)
    w1 = SeriesSolution(lam1, Kind.W_SMALL)
    w2 = SeriesSolution(lam2, Kind.W_SMALL)
    log_abs = np.log(np.abs(np.asarray(z1) * np.asarray(z2)))
    return bracket(phi1, w2, z1, z2) + bracket(w1, phi2, z1, z2) + log_abs * bracket(phi1, phi2, z1, z2)


def brackets(pair: SolutionPair, x1, x2) -> dict:
    lam1, lam2 = pair.lambdas
    return {
        "splus": splus(pair.A, pair.B, x1, x2),
        "bracket": bracket(pair.A, pair.B, x1, x2),
        "s_lambda": s_lambda(lam1, lam2, x1, x2),
    }


@lru_cache(maxsize=4)
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def divided_bracket(f: SeriesSolution, g: SeriesSolution, x1, x2,
                    switch: float | None = None, order: int | None = None):
    """[f,g](x₁,x₂)/(x₁−x₂)，在對角線附近改用積分表示"""
    if f.kind.has_log or g.kind.has_log:
        raise BranchViolation("divided_bracket 只接受整函數型 (Phi, wSmall)")
    switch = settings.bracket_switch if switch is None else switch
    order = settings.gauss_order if order is None else order

    scalar = np.ndim(x1) == 0 and np.ndim(x2) == 0
    a = np.atleast_1d(np.asarray(x1, dtype=complex))
    b = np.atleast_1d(np.asarray(x2, dtype=complex))
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape, dtype=complex)

    near = np.abs(a - b) < switch * (1.0 + np.abs(a) + np.abs(b))
    far = ~near
    if np.any(far):
        af, bf = a[far], b[far]
        out[far] = (f(af) * g(bf) - f(bf) * g(af)) / (af - bf)
    if np.any(near):
        an, bn = a[near], b[near]
        center = 0.5 * (an + bn)
        half = 0.5 * (an - bn)
        nodes, weights = _gauss_legendre(order)
        plus = center[None, :] + nodes[:, None] * half[None, :]
        minus = center[None, :] - nodes[:, None] * half[None, :]
        f0, f1 = derivatives(f, plus.ravel(), 1)
        g0, g1 = derivatives(g, minus.ravel(), 1)
        integrand = (f1 * g0 - f0 * g1).reshape(plus.shape)
        # [f,g](x+h,x−h) = h∫(f'(x+th)g(x−th) − f(x+th)g'(x−th))dt，再除以 2h
        out[near] = 0.5 * np.sum(weights[:, None] * integrand, axis=0)
    return complex(out[0]) if scalar else out

"""
軌道分類
正則性類別與開集 U、U_m、U₃、ϖ(U₃) 的成員旗標
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.algebra.block import BlockVector
from app.algebra.invariants import OrbitInvariants, invariants
from app.config import settings


class RegularityClass(str, enum.Enum):
    REGULAR = "Regular"
    SEMI_REGULAR_MULT1 = "SemiRegularMult1"
    SEMI_REGULAR_MULT2 = "SemiRegularMult2"
    SEMISIMPLE_NON_REGULAR = "SemisimpleNonRegular"
    NILPOTENT = "Nilpotent"
    MIXED = "Mixed"


@dataclass(frozen=True)
class OpenSetFlags:
    in_U: bool
    in_Um: bool
    in_U3: bool
    in_varpi_U3: bool

    def to_dict(self) -> dict:
        return {
            "in_U": self.in_U,
            "in_U_m": self.in_Um,
            "in_U3": self.in_U3,
            "in_varpi_U3": self.in_varpi_U3,
        }


@dataclass(frozen=True)
class Classification:
    regularity: RegularityClass
    flags: OpenSetFlags
    invariants: OrbitInvariants
    # 半正則元素消去的根："alpha"（uv = 0）或 "beta1"（u = v）
    vanishing_root: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"class": self.regularity.value, **self.flags.to_dict()}
        if self.vanishing_root is not None:
            out["vanishing_root"] = self.vanishing_root
        return out


def open_set_flags(Q: float, S: float, tol: float) -> OpenSetFlags:
    S0 = Q * Q - 4.0 * S
    root_s = np.sqrt(S) if S > 0 else 0.0
    return OpenSetFlags(
        in_U=bool(abs(Q) > tol or abs(S0) > tol),
        in_Um=bool(S0 > tol),
        in_U3=bool(S > tol and Q > -2.0 * root_s + tol),
        in_varpi_U3=bool(S > tol and Q < 2.0 * root_s - tol),
    )


def open_set_flags_batch(Q: np.ndarray, S: np.ndarray, tol: float) -> dict[str, np.ndarray]:
    S0 = Q * Q - 4.0 * S
    root_s = np.sqrt(np.clip(S, 0.0, None))
    return {
        "U": (np.abs(Q) > tol) | (np.abs(S0) > tol),
        "U_m": S0 > tol,
        "U3": (S > tol) & (Q > -2.0 * root_s + tol),
        "varpi_U3": (S > tol) & (Q < 2.0 * root_s - tol),
    }


def _small(M: np.ndarray, scale: float, tol: float) -> bool:
    return bool(np.max(np.abs(M)) <= tol * scale)


def classify(X: BlockVector, tol: float | None = None) -> Classification:
    """依 (Q, S, S0) 與容差判定正則性，半正則時回報消去的根"""
    tol = settings.tol_regular if tol is None else tol
    if tol <= 0:
        raise ValueError("tol 必須為正")
    inv = invariants(X)
    Q, S, S0 = inv.Q, inv.S, inv.S0
    flags = open_set_flags(Q, S, tol)
    scale = (1.0 + abs(Q)) ** 2 * (1.0 + abs(S))

    if abs(S * S0) > tol * scale:
        return Classification(RegularityClass.REGULAR, flags, inv)

    M = X.embed()
    m_scale = 1.0 + float(np.max(np.abs(M)))
    q_small = abs(Q) <= tol * (1.0 + abs(Q))
    s_small = abs(S) <= tol * scale
    s0_small = abs(S0) <= tol * scale

    if q_small and s_small:
        M4 = np.linalg.matrix_power(M, 4)
        if _small(M4, m_scale**4, tol):
            return Classification(RegularityClass.NILPOTENT, flags, inv)
        return Classification(RegularityClass.MIXED, flags, inv)

    M2 = M @ M
    if s0_small and s_small:
        if _small(M, m_scale, tol):
            return Classification(RegularityClass.SEMISIMPLE_NON_REGULAR, flags, inv)
        return Classification(RegularityClass.MIXED, flags, inv)

    if s0_small:
        # u = v ≠ 0：半單當且僅當 X² = u·I
        u = 0.5 * Q
        if _small(M2 - u * np.eye(4), m_scale**2, tol):
            return Classification(RegularityClass.SEMI_REGULAR_MULT2, flags, inv, "beta1")
        return Classification(RegularityClass.MIXED, flags, inv)

    # uv = 0 且 u ≠ v：最小多項式整除 t(t² − Q)
    if _small(M2 @ M - Q * M, m_scale**3, tol):
        return Classification(RegularityClass.SEMI_REGULAR_MULT1, flags, inv, "alpha")
    return Classification(RegularityClass.MIXED, flags, inv)

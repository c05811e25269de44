"""
二次型簽名與奇異函數 η
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from app.errors import ZeroArgument


@dataclass(frozen=True)
class Signature:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"簽名需要 p ≥ 1 且 q ≥ 1，收到 ({self.p}, {self.q})")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def parity(self) -> tuple[int, int]:
        return self.p % 2, self.q % 2

    def form(self, y: np.ndarray) -> np.ndarray:
        """Q_{p,q}(y) = y₁² + … + y_p² − y_{p+1}² − … − y_n²，y 形狀 (N, n)"""
        return np.sum(y[:, : self.p] ** 2, axis=1) - np.sum(y[:, self.p :] ** 2, axis=1)

    def __str__(self) -> str:
        return f"({self.p},{self.q})"


def eta_array(sig: Signature, t: np.ndarray) -> np.ndarray:
    """η 的向量版本，t = 0 處不檢查"""
    t = np.asarray(t, dtype=float)
    e = sig.n / 2.0 - 1.0
    odd_p, odd_q = sig.parity
    with np.errstate(divide="ignore", invalid="ignore"):
        if odd_p and not odd_q:
            return np.where(t > 0, np.abs(t) ** e, 0.0)
        if not odd_p and odd_q:
            return np.where(t < 0, np.abs(t) ** e, 0.0)
        if not odd_p and not odd_q:
            # ½·sgn(t)·t^e，e 為整數
            return 0.5 * np.sign(t) ** (int(e) + 1) * np.abs(t) ** e
        return np.sign(t) ** int(e) * np.abs(t) ** e * np.log(np.abs(t))


def eta(sig: Signature, t: float) -> float:
    """依 (p mod 2, q mod 2) 選擇的奇異函數"""
    if t == 0:
        raise ZeroArgument("η 在 t = 0 未定義")
    return float(eta_array(sig, np.array([t]))[0])


def eta_coefficient(sig: Signature) -> float:
    """係數公式中的常數 c"""
    p, q = sig.p, sig.q
    if q % 2 == 0:
        return float((-1) ** (q // 2))
    if p % 2 == 0:
        return float((-1) ** (p // 2))
    return float((-1) ** ((q + 1) // 2)) / math.pi


def predicted_coefficient(sig: Signature, k: int, dq_power_at_zero: float) -> float:
    """c·π^{n/2}/(4^k Γ(n/2+k))·(∂Q)^k f(0)"""
    n = sig.n
    c = eta_coefficient(sig)
    return c * math.pi ** (n / 2.0) / (4.0**k * math.gamma(n / 2.0 + k)) * dq_power_at_zero

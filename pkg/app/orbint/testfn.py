"""
q 上的測試函數
以 X₀ 為中心、半徑 r 的光滑 bump，可經線性映射拉回（h 作用、ϖ）
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.algebra.block import BlockVector, HElement, adjoint_matrix, involution_matrix
from app.algebra.classify import OpenSetFlags, open_set_flags_batch
from app.algebra.invariants import qs_batch
from app.config import settings
from app.errors import EmptySupport, SupportViolation
from app.meanfn.sampling import stream

logger = logging.getLogger(__name__)

UNIT_BALL_VOLUME_8 = math.pi**4 / 24


def bump_profile(s, order: int = 0) -> list[np.ndarray]:
    """g(s) = exp(1 − 1/(1−s)) 在 s < 1，其外為 0；回傳 [g, g', ..., g^(order)]"""
    if order > 4:
        raise ValueError("bump 導數只提供到 4 階")
    s = np.asarray(s, dtype=float)
    inside = s < 1.0
    w = np.where(inside, 1.0 / np.where(inside, 1.0 - s, 1.0), 0.0)
    g = np.where(inside, np.exp(1.0 - w), 0.0)
    # h = 1 − w 的各階導數
    h1, h2, h3, h4 = -(w**2), -2.0 * w**3, -6.0 * w**4, -24.0 * w**5
    out = [g]
    if order >= 1:
        out.append(g * h1)
    if order >= 2:
        out.append(g * (h2 + h1 * h1))
    if order >= 3:
        out.append(g * (h3 + 3.0 * h1 * h2 + h1**3))
    if order >= 4:
        out.append(g * (h4 + 4.0 * h1 * h3 + 3.0 * h2 * h2 + 6.0 * h1 * h1 * h2 + h1**4))
    return out


def unit_ball(rng: np.random.Generator, n: int, dim: int = 8) -> np.ndarray:
    """單位球內均勻分布：高斯方向乘以 U^{1/dim}"""
    d = rng.standard_normal((n, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * rng.random((n, 1)) ** (1.0 / dim)


def unit_sphere(rng: np.random.Generator, n: int, dim: int = 8) -> np.ndarray:
    d = rng.standard_normal((n, dim))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


@dataclass
class QTestFunction:
    """f(X) = amplitude·g(|M X − X₀|²/r²)；M 預設為單位矩陣"""

    center: np.ndarray
    radius: float
    amplitude: float = 1.0
    transform: Optional[np.ndarray] = None
    name: Optional[str] = None

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).reshape(8)
        if not self.radius > 0:
            raise EmptySupport(f"半徑必須為正：{self.radius}")
        self.transform = np.eye(8) if self.transform is None else np.asarray(self.transform, dtype=float)
        if abs(np.linalg.det(self.transform)) < settings.tol_inv:
            raise EmptySupport("拉回映射不可逆")

    @classmethod
    def at(cls, X0: BlockVector, radius: float, amplitude: float = 1.0, name: str | None = None) -> "QTestFunction":
        return cls(X0.to_vector(), radius, amplitude, None, name)

    @property
    def center_block(self) -> BlockVector:
        return BlockVector.from_vector(np.linalg.solve(self.transform, self.center))

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0

    def local(self, x: np.ndarray) -> np.ndarray:
        """d = M X − X₀"""
        return np.asarray(x, dtype=float) @ self.transform.T - self.center

    def s_values(self, x: np.ndarray) -> np.ndarray:
        d = self.local(x)
        return np.sum(d * d, axis=-1) / self.radius**2

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_zero:
            return np.zeros(x.shape[:-1])
        return self.amplitude * bump_profile(self.s_values(x))[0]

    def pullback(self, M: np.ndarray, name: str | None = None) -> "QTestFunction":
        """(f∘M)(X) = f(M X)"""
        return type(self)(self.center, self.radius, self.amplitude, self.transform @ M, name or self.name)

    def compose_adjoint(self, h: HElement) -> "QTestFunction":
        return self.pullback(adjoint_matrix(h), f"{self.name}∘h")

    def compose_varpi(self) -> "QTestFunction":
        return self.pullback(involution_matrix("varpi"), f"{self.name}∘ϖ")

    @property
    def box(self) -> np.ndarray:
        m_inv = np.linalg.inv(self.transform)
        mid = m_inv @ self.center
        half = self.radius * np.linalg.norm(m_inv, axis=1)
        return np.stack([mid - half, mid + half], axis=1)

    @property
    def volume(self) -> float:
        """支撐（橢球）的 Lebesgue 體積"""
        return UNIT_BALL_VOLUME_8 * self.radius**8 / abs(float(np.linalg.det(self.transform)))

    def _from_local(self, u: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.transform, (self.center + self.radius * u).T).T

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """支撐內均勻抽樣"""
        return self._from_local(unit_ball(rng, n))

    def sample_closure(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """閉球的抽樣：內部一半、邊界一半"""
        half = n // 2
        return np.concatenate([self._from_local(unit_ball(rng, n - half)), self._from_local(unit_sphere(rng, half))])

    def support_flags(self, n_samples: int | None = None, seed: int = 0, tol: float | None = None) -> OpenSetFlags:
        """抽樣判定閉支撐落在哪些開集內"""
        n_samples = settings.support_samples if n_samples is None else n_samples
        tol = settings.tol_regular if tol is None else tol
        x = self.sample_closure(stream(seed, 0, 99), n_samples)
        Q, S = qs_batch(x[:, :4].reshape(-1, 2, 2), x[:, 4:].reshape(-1, 2, 2))
        flags = open_set_flags_batch(Q, S, tol)
        return OpenSetFlags(
            in_U=bool(np.all(flags["U"])),
            in_Um=bool(np.all(flags["U_m"])),
            in_U3=bool(np.all(flags["U3"])),
            in_varpi_U3=bool(np.all(flags["varpi_U3"])),
        )

    def require(self, *names: str, n_samples: int | None = None, seed: int = 0) -> OpenSetFlags:
        """names 取自 in_U、in_U_m、in_U3、in_varpi_U3"""
        flags = self.support_flags(n_samples, seed)
        encoded = flags.to_dict()
        missing = [n for n in names if not encoded[n]]
        if missing:
            raise SupportViolation(f"{self.name or 'f'} 的支撐不在 {', '.join(missing)} 內")
        return flags

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "center": self.center_block.to_dict(),
            "radius": self.radius,
            "amplitude": self.amplitude,
            "pulled_back": not np.array_equal(self.transform, np.eye(8)),
        }

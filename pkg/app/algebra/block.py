"""
區塊矩陣核心
q 的元素 X = [[0, Y], [Z, 0]] 與 H = GL(2)×GL(2) 的元素 h = (A, B)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from app.config import settings
from app.errors import SingularH

# 八個座標的排列順序：Y11, Y12, Y21, Y22, Z11, Z12, Z21, Z22
COORDINATES = ("Y11", "Y12", "Y21", "Y22", "Z11", "Z12", "Z21", "Z22")

# q 上的 ω 測度相對 8 維 Lebesgue 測度的比例
MEASURE_SCALE = 1.0 / 16.0


def _as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.shape != (2, 2):
        raise ValueError(f"需要 2×2 矩陣，收到形狀 {arr.shape}")
    return arr


@dataclass(frozen=True)
class BlockVector:
    """q 的元素，以兩個 2×2 實矩陣 (Y, Z) 表示"""

    Y: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Y", _as_matrix(self.Y))
        object.__setattr__(self, "Z", _as_matrix(self.Z))

    @classmethod
    def from_vector(cls, x) -> "BlockVector":
        x = np.asarray(x, dtype=float).reshape(8)
        return cls(x[:4].reshape(2, 2), x[4:].reshape(2, 2))

    @classmethod
    def zero(cls) -> "BlockVector":
        return cls(np.zeros((2, 2)), np.zeros((2, 2)))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.Y.reshape(4), self.Z.reshape(4)])

    def embed(self) -> np.ndarray:
        """4×4 嵌入，對角區塊為零"""
        out = np.zeros((4, 4))
        out[:2, 2:] = self.Y
        out[2:, :2] = self.Z
        return out

    def __add__(self, other: "BlockVector") -> "BlockVector":
        return BlockVector(self.Y + other.Y, self.Z + other.Z)

    def __sub__(self, other: "BlockVector") -> "BlockVector":
        return BlockVector(self.Y - other.Y, self.Z - other.Z)

    def __mul__(self, c: float) -> "BlockVector":
        return BlockVector(c * self.Y, c * self.Z)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.Y**2) + np.sum(self.Z**2)))

    def to_dict(self) -> dict:
        return {"Y": self.Y.tolist(), "Z": self.Z.tolist()}


@dataclass(frozen=True)
class HElement:
    """H 的元素 (A, B)，作用為 h·X = (A Y B⁻¹, B Z A⁻¹)"""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _as_matrix(self.A))
        object.__setattr__(self, "B", _as_matrix(self.B))

    @classmethod
    def identity(cls) -> "HElement":
        return cls(np.eye(2), np.eye(2))

    def check(self, tol_inv: float | None = None) -> "HElement":
        tol_inv = settings.tol_inv if tol_inv is None else tol_inv
        det_a = np.linalg.det(self.A)
        det_b = np.linalg.det(self.B)
        if abs(det_a) <= tol_inv or abs(det_b) <= tol_inv:
            raise SingularH(f"det(A)={det_a:.3e}, det(B)={det_b:.3e} 低於容差 {tol_inv:.1e}")
        return self

    def compose(self, other: "HElement") -> "HElement":
        """(self ∘ other)·X = self·(other·X)"""
        return HElement(self.A @ other.A, self.B @ other.B)

    def inverse(self) -> "HElement":
        self.check()
        return HElement(np.linalg.inv(self.A), np.linalg.inv(self.B))

    def embed(self) -> np.ndarray:
        out = np.zeros((4, 4))
        out[:2, :2] = self.A
        out[2:, 2:] = self.B
        return out

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "B": self.B.tolist()}


def adjoint(h: HElement, X: BlockVector, tol_inv: float | None = None) -> BlockVector:
    """h·X = (A Y B⁻¹, B Z A⁻¹)"""
    h.check(tol_inv)
    a_inv = np.linalg.inv(h.A)
    b_inv = np.linalg.inv(h.B)
    return BlockVector(h.A @ X.Y @ b_inv, h.B @ X.Z @ a_inv)


def involution(X: BlockVector, which: Literal["sigma", "varpi", "negate"]) -> BlockVector:
    """σ、ϖ 與取負"""
    if which == "sigma":
        # σ 是 diag(I, −I) 的共軛，在 q 上等於 −X
        return BlockVector(-X.Y, -X.Z)
    if which == "varpi":
        return BlockVector(X.Y.copy(), -X.Z)
    if which == "negate":
        return BlockVector(-X.Y, -X.Z)
    raise ValueError(f"未知的對合: {which}")


def random_h(rng: np.random.Generator, min_abs_det: float = 0.2) -> HElement:
    """條件良好的隨機 h（行列式遠離 0）"""
    while True:
        A = rng.uniform(-1.0, 1.0, size=(2, 2))
        B = rng.uniform(-1.0, 1.0, size=(2, 2))
        if abs(np.linalg.det(A)) > min_abs_det and abs(np.linalg.det(B)) > min_abs_det:
            return HElement(A, B)


def random_block(rng: np.random.Generator, scale: float = 1.0) -> BlockVector:
    return BlockVector.from_vector(rng.uniform(-scale, scale, size=8))


def adjoint_matrix(h: HElement) -> np.ndarray:
    """X ↦ h·X 在八個座標上的 8×8 矩陣"""
    basis = np.eye(8)
    cols = [adjoint(h, BlockVector.from_vector(e)).to_vector() for e in basis]
    return np.stack(cols, axis=1)


def involution_matrix(which: Literal["sigma", "varpi", "negate"]) -> np.ndarray:
    basis = np.eye(8)
    cols = [involution(BlockVector.from_vector(e), which).to_vector() for e in basis]
    return np.stack(cols, axis=1)

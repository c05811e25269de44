"""
軌道不變量
Q = tr(YZ)、S = det(Y)det(Z)、S0 = Q² − 4S、δ、u、v
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.algebra.block import BlockVector


@dataclass(frozen=True)
class OrbitInvariants:
    Q: float
    S: float
    S0: float
    delta: complex
    u: complex
    v: complex

    @property
    def real_spectrum(self) -> bool:
        return self.S0 >= 0

    def to_dict(self) -> dict:
        def enc(z: complex):
            z = complex(z)
            return z.real if z.imag == 0 else {"re": z.real, "im": z.imag}

        return {
            "Q": self.Q,
            "S": self.S,
            "S0": self.S0,
            "delta": enc(self.delta),
            "u": enc(self.u),
            "v": enc(self.v),
        }


def _from_qs(Q: float, S: float) -> OrbitInvariants:
    S0 = Q * Q - 4.0 * S
    if S0 >= 0:
        delta = complex(np.sqrt(S0))
        u = complex(0.5 * (Q + delta.real))
        v = complex(0.5 * (Q - delta.real))
    else:
        delta = complex(0.0, np.sqrt(-S0))
        u = complex(0.5 * Q, 0.5 * delta.imag)
        v = u.conjugate()
    return OrbitInvariants(Q=float(Q), S=float(S), S0=float(S0), delta=delta, u=u, v=v)


def invariants(X: BlockVector) -> OrbitInvariants:
    """u、v 是 t² − Q t + S 的根，依 u ≥ v 或 Im u > 0 排列"""
    Q = float(np.trace(X.Y @ X.Z))
    S = float(np.linalg.det(X.Y) * np.linalg.det(X.Z))
    return _from_qs(Q, S)


def qs_batch(Y: np.ndarray, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """對 (N,2,2) 批次計算 Q 與 S"""
    Q = np.einsum("nij,nji->n", Y, Z)
    det_y = Y[:, 0, 0] * Y[:, 1, 1] - Y[:, 0, 1] * Y[:, 1, 0]
    det_z = Z[:, 0, 0] * Z[:, 1, 1] - Z[:, 0, 1] * Z[:, 1, 0]
    return Q, det_y * det_z


def invariants_batch(Y: np.ndarray, Z: np.ndarray) -> dict[str, np.ndarray]:
    """批次版本，回傳 Q、S、S0 與複數 u、v"""
    Q, S = qs_batch(Y, Z)
    S0 = Q * Q - 4.0 * S
    root = np.sqrt(np.abs(S0))
    real = S0 >= 0
    delta = np.where(real, root + 0j, 1j * root)
    u = 0.5 * (Q + delta)
    v = np.where(real, 0.5 * (Q - root) + 0j, np.conj(u))
    return {"Q": Q, "S": S, "S0": S0, "delta": delta, "u": u, "v": v}


def charpoly_coefficients(X: BlockVector) -> np.ndarray:
    """4×4 嵌入的特徵多項式係數（最高次在前）"""
    return np.poly(X.embed())

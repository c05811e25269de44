"""
下降映射
ψ(x, y) 與 ψ₃(x, y, z)：把低維二次型嵌入 q，使 Q∘ψ = x² − y²、Q∘ψ₃ = 2(x² + y² − z²)
"""

from __future__ import annotations

import numpy as np

from app.algebra.block import BlockVector


def descent_psi(x: float, y: float) -> BlockVector:
    return BlockVector(np.diag([0.0, x + y]), np.diag([0.0, x - y]))


def descent_psi3(x: float, y: float, z: float) -> BlockVector:
    M = np.array([[x, y + z], [y - z, -x]], dtype=float)
    return BlockVector(M, M.copy())


def descent_psi_batch(points: np.ndarray) -> np.ndarray:
    """(N,2) → (N,8)"""
    points = np.asarray(points, dtype=float)
    out = np.zeros((len(points), 8))
    out[:, 3] = points[:, 0] + points[:, 1]
    out[:, 7] = points[:, 0] - points[:, 1]
    return out


def descent_psi3_batch(points: np.ndarray) -> np.ndarray:
    """(N,3) → (N,8)"""
    x, y, z = np.asarray(points, dtype=float).T
    block = np.stack([x, y + z, y - z, -x], axis=1)
    return np.concatenate([block, block], axis=1)

"""
Bessel 型級數解
L_c y = 4(z y'' + y') = λ y 的解 Φ_λ、w_λ、W_λ 與 W_λ^r
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from app.config import settings
from app.errors import BranchViolation, TruncationFailure

EULER_GAMMA = 0.57721566490153286061


class Kind(str, enum.Enum):
    PHI = "Phi"
    W_COMPLEX = "WComplex"
    W_REAL = "WReal"
    W_SMALL = "wSmall"

    @property
    def has_log(self) -> bool:
        return self in (Kind.W_COMPLEX, Kind.W_REAL)


@lru_cache(maxsize=8)
def _a_extended(n: int) -> np.ndarray:
    out = np.empty(n + 1, dtype=np.longdouble)
    out[0] = 2 * np.longdouble("0.57721566490153286061")
    two = np.longdouble(2)
    for k in range(n):
        out[k + 1] = out[k] - two / (k + 1)
    out.setflags(write=False)
    return out


def a_coefficients(n: int) -> np.ndarray:
    """a_0 = 2γ，a_{n+1} = a_n − 2/(n+1)"""
    return _a_extended(n).astype(float)


@dataclass(frozen=True)
class SeriesSolution:
    lam: complex
    kind: Kind = Kind.PHI
    max_terms: int | None = None
    tail_tol: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "kind", Kind(self.kind))

    @property
    def terms_cap(self) -> int:
        return settings.max_terms if self.max_terms is None else self.max_terms

    @property
    def tol(self) -> float:
        return settings.tail_tol if self.tail_tol is None else self.tail_tol

    def with_kind(self, kind: Kind) -> "SeriesSolution":
        return SeriesSolution(self.lam, kind, self.max_terms, self.tail_tol)

    def __call__(self, z):
        return evaluate(self, z)

    def d(self, z):
        return evaluate_d(self, z)

    def d2(self, z):
        return evaluate_d2(self, z)


def _entire_derivative(sol: SeriesSolution, z: np.ndarray, k: int, weighted: bool) -> np.ndarray:
    """Σ_n b_n c_n z^n 的 k 階導數，c_n = λⁿ/(4ⁿ n!²)，b_n = a_n 或 1"""
    # 延伸精度累加，負實軸上的項彼此大量相消
    lam = sol.lam
    x = (lam * z).astype(np.clongdouble)
    a = _a_extended(sol.terms_cap + k + 1) if weighted else None
    term = np.full(z.shape, 1, dtype=np.clongdouble) / math.factorial(k)
    total = term * (a[k] if weighted else 1)
    abs_x = np.abs(x).astype(float)
    m = 0
    while True:
        ratio = x / (4.0 * (m + 1) * (m + k + 1))
        term = term * ratio
        m += 1
        weight = a[m + k] if weighted else 1
        contrib = term * weight
        total = total + contrib
        decreasing = 4.0 * (m + 1) * (m + k + 1) > abs_x
        small = np.abs(contrib).astype(float) < sol.tol * (1.0 + np.abs(total).astype(float))
        if np.all(decreasing & small):
            break
        if m >= sol.terms_cap:
            raise TruncationFailure(f"{sol.terms_cap} 項內未達 tail_tol={sol.tol:.1e}")
    return (lam / 4.0) ** k * total.astype(complex)


def _log_derivative(z: np.ndarray, j: int, real_branch: bool) -> np.ndarray:
    if j == 0:
        return np.log(np.abs(z)) + 0j if real_branch else np.log(z)
    return (-1.0) ** (j - 1) * math.factorial(j - 1) / z**j


def _prepare(sol: SeriesSolution, z) -> tuple[np.ndarray, bool]:
    scalar = np.isscalar(z) or np.ndim(z) == 0
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    cap = settings.max_series_arg
    if np.any(np.abs(sol.lam * arr) > cap):
        raise TruncationFailure(f"|λz| 超過 {cap:.0e}，拒絕評估")
    if sol.kind is Kind.W_COMPLEX:
        if np.any((arr.imag == 0) & (arr.real <= 0)):
            raise BranchViolation("WComplex 需要 z ∉ ℝ₋（主支對數）")
    elif sol.kind is Kind.W_REAL:
        if np.any(arr.imag != 0):
            raise BranchViolation("WReal 需要實數 t")
        if np.any(arr.real == 0):
            raise BranchViolation("WReal 需要 t ≠ 0")
    return arr, scalar


def derivatives(sol: SeriesSolution, z, order: int = 2) -> list:
    """[y, y', ..., y^(order)]，對數項以解析方式處理"""
    arr, scalar = _prepare(sol, z)
    if sol.kind is Kind.PHI:
        out = [_entire_derivative(sol, arr, k, False) for k in range(order + 1)]
    elif sol.kind is Kind.W_SMALL:
        out = [_entire_derivative(sol, arr, k, True) for k in range(order + 1)]
    else:
        real_branch = sol.kind is Kind.W_REAL
        phi = [_entire_derivative(sol, arr, k, False) for k in range(order + 1)]
        small = [_entire_derivative(sol, arr, k, True) for k in range(order + 1)]
        logs = [_log_derivative(arr, j, real_branch) for j in range(order + 1)]
        out = []
        for k in range(order + 1):
            acc = small[k].copy()
            for j in range(k + 1):
                acc = acc + math.comb(k, j) * logs[j] * phi[k - j]
            out.append(acc)
    if scalar:
        return [complex(v[0]) for v in out]
    return out


def evaluate(sol: SeriesSolution, z):
    return derivatives(sol, z, 0)[0]


def evaluate_d(sol: SeriesSolution, z):
    return derivatives(sol, z, 1)[1]


def evaluate_d2(sol: SeriesSolution, z):
    return derivatives(sol, z, 2)[2]


def ode_residual(sol: SeriesSolution, z):
    """4(z y'' + y') − λ y"""
    y, dy, d2y = derivatives(sol, z, 2)
    if isinstance(y, complex):
        zc = complex(z)
    else:
        zc = np.atleast_1d(np.asarray(z, dtype=complex))
    return 4.0 * (zc * d2y + dy) - sol.lam * y


def wronskian_constant(lam: complex, t):
    """t(Φ (W^r)' − Φ' W^r)，理論值為 1"""
    phi = SeriesSolution(lam, Kind.PHI)
    w = SeriesSolution(lam, Kind.W_REAL)
    p0, p1 = derivatives(phi, t, 1)
    w0, w1 = derivatives(w, t, 1)
    tc = complex(t) if isinstance(p0, complex) else np.asarray(t, dtype=complex)
    return tc * (p0 * w1 - p1 * w0)

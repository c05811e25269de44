"""
不變特徵分佈的基底
F_ana、F_sing、F⁺_{A,B} 的求值與其徑向分量 Ψ_m、Ψ₂
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from app.algebra.block import BlockVector
from app.algebra.cartan import CartanClass
from app.algebra.classify import open_set_flags
from app.algebra.invariants import invariants, invariants_batch
from app.config import settings
from app.eigendist.jets import character_value
from app.errors import LogPole, OutsideDomain
from app.specfun import Kind, SeriesSolution, check_regular_character, divided_bracket, s_lambda

logger = logging.getLogger(__name__)

PLUS_KINDS = (Kind.PHI, Kind.W_REAL)


class BasisKind(str, enum.Enum):
    ANA = "Ana"
    SING = "Sing"
    PLUS = "Plus"


@dataclass(frozen=True)
class BasisFunction:
    which: BasisKind
    lambda1: complex
    lambda2: complex
    a_kind: Kind = Kind.PHI
    b_kind: Kind = Kind.PHI

    def __post_init__(self):
        object.__setattr__(self, "which", BasisKind(self.which))
        object.__setattr__(self, "lambda1", complex(self.lambda1))
        object.__setattr__(self, "lambda2", complex(self.lambda2))
        object.__setattr__(self, "a_kind", Kind(self.a_kind))
        object.__setattr__(self, "b_kind", Kind(self.b_kind))
        check_regular_character(self.lambda1, self.lambda2)
        if self.which is BasisKind.PLUS and (self.a_kind not in PLUS_KINDS or self.b_kind not in PLUS_KINDS):
            raise ValueError(f"Plus 只接受 Phi 或 WReal：{self.a_kind.value}, {self.b_kind.value}")

    @classmethod
    def ana(cls, lam1, lam2) -> "BasisFunction":
        return cls(BasisKind.ANA, lam1, lam2)

    @classmethod
    def sing(cls, lam1, lam2) -> "BasisFunction":
        return cls(BasisKind.SING, lam1, lam2)

    @classmethod
    def plus(cls, lam1, lam2, a_kind: Kind = Kind.PHI, b_kind: Kind = Kind.PHI) -> "BasisFunction":
        return cls(BasisKind.PLUS, lam1, lam2, a_kind, b_kind)

    @property
    def name(self) -> str:
        if self.which is BasisKind.PLUS:
            return f"Plus({self.a_kind.value},{self.b_kind.value})"
        return self.which.value

    def chi(self, P: str) -> complex:
        return character_value(P, self.lambda1, self.lambda2)

    def solutions(self) -> tuple[SeriesSolution, SeriesSolution]:
        return SeriesSolution(self.lambda1, self.a_kind), SeriesSolution(self.lambda2, self.b_kind)

    def to_dict(self) -> dict:
        out = {
            "which": self.which.value,
            "lambda1": {"re": self.lambda1.real, "im": self.lambda1.imag},
            "lambda2": {"re": self.lambda2.real, "im": self.lambda2.imag},
        }
        if self.which is BasisKind.PLUS:
            out["a_kind"] = self.a_kind.value
            out["b_kind"] = self.b_kind.value
        return out


def all_basis(lam1, lam2) -> list[BasisFunction]:
    """U 上的六個基底函數"""
    out = [BasisFunction.ana(lam1, lam2), BasisFunction.sing(lam1, lam2)]
    for a in PLUS_KINDS:
        for b in PLUS_KINDS:
            out.append(BasisFunction.plus(lam1, lam2, a, b))
    return out


def _phi(lam) -> SeriesSolution:
    return SeriesSolution(lam, Kind.PHI)


def _w_small(lam) -> SeriesSolution:
    return SeriesSolution(lam, Kind.W_SMALL)


def _from_spectrum(bf: BasisFunction, u: np.ndarray, v: np.ndarray, S: np.ndarray, S0: np.ndarray) -> np.ndarray:
    lam1, lam2 = bf.lambda1, bf.lambda2
    if bf.which is BasisKind.ANA:
        return np.asarray(divided_bracket(_phi(lam1), _phi(lam2), u, v), dtype=complex)
    if bf.which is BasisKind.SING:
        ana = divided_bracket(_phi(lam1), _phi(lam2), u, v)
        mixed = divided_bracket(_phi(lam1), _w_small(lam2), u, v) + divided_bracket(_w_small(lam1), _phi(lam2), u, v)
        return np.asarray(mixed + np.log(np.abs(S)) * ana, dtype=complex)
    out = np.zeros(u.shape, dtype=complex)
    mask = S0 > 0
    if np.any(mask):
        A, B = bf.solutions()
        ur, vr = u[mask].real, v[mask].real
        out[mask] = (A(ur) * B(vr) + A(vr) * B(ur)) / (ur - vr)
    return out


def evaluate_batch(bf: BasisFunction, x: np.ndarray) -> np.ndarray:
    """(N,8) 座標上的 F 值；不檢查 U"""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    inv = invariants_batch(x[:, :4].reshape(-1, 2, 2), x[:, 4:].reshape(-1, 2, 2))
    return _from_spectrum(bf, inv["u"], inv["v"], inv["S"], inv["S0"])


def evaluate(bf: BasisFunction, X: BlockVector) -> complex:
    inv = invariants(X)
    scale = 1.0 + inv.Q * inv.Q
    if not open_set_flags(inv.Q, inv.S, settings.tol_regular).in_U:
        raise OutsideDomain(f"X 在冪零錐上（Q={inv.Q:.3g}, S={inv.S:.3g}）")
    if bf.which is BasisKind.SING and abs(inv.S) <= settings.tol_num * scale:
        raise LogPole(f"F_sing 在 uv = 0 處有對數奇點（S={inv.S:.3g}）")
    value = _from_spectrum(
        bf, np.array([inv.u]), np.array([inv.v]), np.array([inv.S]), np.array([inv.S0])
    )
    return complex(value[0])


PlaneFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RadialComponents:
    """Ψ_m = Ψ⁺ + i·sgn(t₁−t₂)Ψ⁻，Ψ₂(τ,θ) = Ψ⁻((τ+iθ)², (τ−iθ)²)"""

    name: str
    psi_plus: PlaneFn
    psi_minus: PlaneFn

    def psi_m(self, t1, t2) -> np.ndarray:
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        return self.psi_plus(t1, t2) + 1j * np.sign(t1 - t2) * self.psi_minus(t1, t2)

    def psi_2(self, tau, theta) -> np.ndarray:
        """(τ, θ) 各自取偶延拓"""
        tau = np.abs(np.asarray(tau, dtype=float))
        theta = np.abs(np.asarray(theta, dtype=float))
        zeta = tau + 1j * theta
        return self.psi_minus(zeta * zeta, np.conj(zeta) ** 2)

    def psi_m_r(self, tau, theta) -> np.ndarray:
        """(Ψ_m)_r(τ,θ) = Ψ_m((τ+θ)², (τ−θ)²)"""
        tau = np.asarray(tau, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return self.psi_m((tau + theta) ** 2, (tau - theta) ** 2)

    def on_class(self, cartan: CartanClass) -> PlaneFn:
        """Cartan 參數上的 |δ|·F"""
        cartan = CartanClass(cartan)
        if cartan is CartanClass.APP:
            return lambda p1, p2: self.psi_m(p1 * p1, p2 * p2)
        if cartan is CartanClass.APM:
            return lambda p1, p2: self.psi_m(p1 * p1, -p2 * p2)
        if cartan is CartanClass.AMM:
            return lambda p1, p2: self.psi_m(-p1 * p1, -p2 * p2)
        return self.psi_2


def _zero(t1, t2):
    return np.zeros(np.broadcast(t1, t2).shape, dtype=complex)


def radial(bf: BasisFunction) -> RadialComponents:
    lam1, lam2 = bf.lambda1, bf.lambda2
    if bf.which is BasisKind.ANA:
        phi1, phi2 = _phi(lam1), _phi(lam2)

        def minus(z1, z2):
            return -1j * (phi1(z1) * phi2(z2) - phi1(z2) * phi2(z1))

        return RadialComponents(bf.name, _zero, minus)
    if bf.which is BasisKind.SING:
        return RadialComponents(bf.name, _zero, lambda z1, z2: -1j * s_lambda(lam1, lam2, z1, z2))
    A, B = bf.solutions()

    def plus(t1, t2):
        return A(t1) * B(t2) + A(t2) * B(t1)

    return RadialComponents(bf.name, plus, _zero)


def broken_radial(lam1, lam2) -> RadialComponents:
    """Ψ(t₁,t₂) = Y(t₂)Φ_{λ₁}(t₁)W^r_{λ₂}(t₂)，第二變數的 [1] 部分在 0 跳躍"""
    phi1 = _phi(lam1)
    w2 = SeriesSolution(lam2, Kind.W_REAL)

    def plus(t1, t2):
        t2 = np.asarray(t2, dtype=float)
        out = np.zeros(np.broadcast(t1, t2).shape, dtype=complex)
        mask = np.broadcast_to(t2 > 0, out.shape)
        t1b = np.broadcast_to(t1, out.shape)
        t2b = np.broadcast_to(t2, out.shape)
        if np.any(mask):
            out[mask] = phi1(t1b[mask]) * w2(t2b[mask])
        return out

    return RadialComponents("broken", plus, _zero)


def w_bracket_radial(lam1, lam2) -> RadialComponents:
    """Ψ⁻ = −i[W_{λ₁},W_{λ₂}]（主支對數），違反 ϖ 側條件"""
    W1 = SeriesSolution(lam1, Kind.W_COMPLEX)
    W2 = SeriesSolution(lam2, Kind.W_COMPLEX)
    R1 = SeriesSolution(lam1, Kind.W_REAL)
    R2 = SeriesSolution(lam2, Kind.W_REAL)

    def minus(z1, z2):
        z1 = np.asarray(z1)
        if np.iscomplexobj(z1) and np.any(np.asarray(z1).imag != 0):
            return -1j * (W1(z1) * W2(z2) - W1(z2) * W2(z1))
        return -1j * (R1(z1) * R2(z2) - R1(z2) * R2(z1))

    return RadialComponents("[W,W]", _zero, minus)


def varpi_basis(bf: BasisFunction) -> tuple[float, BasisFunction]:
    """F(ϖX) = sign·F^{χ⁻}(X)，χ⁻ 為 (−λ₁, −λ₂)"""
    flipped = BasisFunction(bf.which, -bf.lambda1, -bf.lambda2, bf.a_kind, bf.b_kind)
    sign = 1.0 if bf.which is BasisKind.PLUS else -1.0
    return sign, flipped

"""
截斷 Taylor（jet）算術與常係數微分算子
多變數 jet 的加減乘除、一元函數複合、線性代換，以及 ∂(Q)、∂(S)、∂(S0) 在測試函數上的作用
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from app.algebra.block import COORDINATES, BlockVector
from app.algebra.invariants import qs_batch
from app.orbint.testfn import QTestFunction, bump_profile

logger = logging.getLogger(__name__)

MultiIndex = tuple[int, ...]


def _compositions(nvars: int, degree: int) -> list[MultiIndex]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        alpha = [0] * nvars
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return out


@dataclass(frozen=True)
class _Layout:
    indices: tuple[MultiIndex, ...]
    position: dict
    factorials: np.ndarray
    degrees: np.ndarray
    left: np.ndarray
    right: np.ndarray
    target: np.ndarray


@lru_cache(maxsize=32)
def _layout(nvars: int, order: int) -> _Layout:
    """依總次數排列的多重指標，以及乘法表 (i, j) → k"""
    indices = tuple(a for d in range(order + 1) for a in _compositions(nvars, d))
    position = {a: k for k, a in enumerate(indices)}
    factorials = np.array([math.prod(math.factorial(x) for x in a) for a in indices], dtype=float)
    degrees = np.array([sum(a) for a in indices])
    left, right, target = [], [], []
    for i, a in enumerate(indices):
        for j, b in enumerate(indices):
            if degrees[i] + degrees[j] > order:
                continue
            left.append(i)
            right.append(j)
            target.append(position[tuple(x + y for x, y in zip(a, b))])
    return _Layout(indices, position, factorials, degrees,
                   np.array(left), np.array(right), np.array(target))


def n_coefficients(nvars: int, order: int) -> int:
    return math.comb(nvars + order, order)


def monomials(d: np.ndarray, order: int) -> np.ndarray:
    """d^α 依 _layout 排列，回傳 (n, 係數個數)"""
    d = np.atleast_2d(np.asarray(d, dtype=float))
    n, nvars = d.shape
    powers = [np.ones_like(d)]
    for _ in range(order):
        powers.append(powers[-1] * d)
    indices = _layout(nvars, order).indices
    out = np.ones((n, len(indices)))
    for k, alpha in enumerate(indices):
        for i, a in enumerate(alpha):
            if a:
                out[:, k] *= powers[a][:, i]
    return out


class Jet:
    """f(x₀ + d) ≈ Σ_{|α| ≤ order} c_α d^α"""

    __slots__ = ("nvars", "order", "coef")

    def __init__(self, coef, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        self.coef = np.asarray(coef)
        if self.coef.shape != (n_coefficients(nvars, order),):
            raise ValueError(f"係數個數 {self.coef.shape} 與 ({nvars} 變數, {order} 階) 不符")

    @property
    def layout(self) -> _Layout:
        return _layout(self.nvars, self.order)

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        coef = np.zeros(n_coefficients(nvars, order), dtype=np.result_type(value, float))
        coef[0] = value
        return cls(coef, nvars, order)

    @classmethod
    def variable(cls, i: int, value, nvars: int, order: int) -> "Jet":
        jet = cls.constant(value, nvars, order)
        if order >= 1:
            e = [0] * nvars
            e[i] = 1
            jet.coef[jet.layout.position[tuple(e)]] = 1.0
        return jet

    @classmethod
    def variables(cls, point: Sequence, order: int) -> list["Jet"]:
        n = len(point)
        return [cls.variable(i, point[i], n, order) for i in range(n)]

    @property
    def value(self):
        return self.coef[0]

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if (other.nvars, other.order) != (self.nvars, self.order):
                raise ValueError("jet 的變數數或階數不一致")
            return other
        return Jet.constant(other, self.nvars, self.order)

    def __add__(self, other) -> "Jet":
        other = self._coerce(other)
        return Jet(self.coef + other.coef, self.nvars, self.order)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(-self.coef, self.nvars, self.order)

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.coef * other, self.nvars, self.order)
        other = self._coerce(other)
        lay = self.layout
        prod = self.coef[lay.left] * other.coef[lay.right]
        out = np.zeros(len(self.coef), dtype=prod.dtype)
        np.add.at(out, lay.target, prod)
        return Jet(out, self.nvars, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.coef / other, self.nvars, self.order)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, n: int) -> "Jet":
        if not isinstance(n, int) or n < 0:
            return self.power(n)
        out = Jet.constant(1.0, self.nvars, self.order)
        for _ in range(n):
            out = out * self
        return out

    def nilpotent(self) -> "Jet":
        coef = self.coef.copy()
        coef[0] = 0
        return Jet(coef, self.nvars, self.order)

    def compose(self, derivs: Sequence) -> "Jet":
        """g∘self，derivs = [g(a), g'(a), …, g^(K)(a)]，a = self.value"""
        n = self.nilpotent()
        k_max = min(len(derivs) - 1, self.order)
        out = Jet.constant(derivs[k_max] / math.factorial(k_max), self.nvars, self.order)
        for k in range(k_max - 1, -1, -1):
            out = out * n + derivs[k] / math.factorial(k)
        return out

    def reciprocal(self) -> "Jet":
        a = self.value
        if a == 0:
            raise ZeroDivisionError("jet 的常數項為 0")
        return self.compose([(-1) ** k * math.factorial(k) / a ** (k + 1) for k in range(self.order + 1)])

    def power(self, p: float) -> "Jet":
        a = complex(self.value) if np.iscomplexobj(self.coef) else float(self.value)
        derivs, c = [], 1.0
        for k in range(self.order + 1):
            derivs.append(c * a ** (p - k))
            c *= p - k
        return self.compose(derivs)

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self.compose([e] * (self.order + 1))

    def log(self) -> "Jet":
        a = self.value
        derivs = [np.log(a)] + [(-1) ** (k - 1) * math.factorial(k - 1) / a**k for k in range(1, self.order + 1)]
        return self.compose(derivs)

    def coefficient(self, alpha: MultiIndex):
        return self.coef[self.layout.position[tuple(alpha)]]

    def derivative(self, alpha: MultiIndex):
        """∂^α f(x₀) = α!·c_α"""
        k = self.layout.position[tuple(alpha)]
        return self.layout.factorials[k] * self.coef[k]

    def partial(self, i: int) -> "Jet":
        """∂_i f 的 jet，階數降一"""
        if self.order == 0:
            raise ValueError("0 階 jet 無法再微分")
        lay = _layout(self.nvars, self.order - 1)
        out = np.zeros(len(lay.indices), dtype=self.coef.dtype)
        for k, a in enumerate(lay.indices):
            up = list(a)
            up[i] += 1
            out[k] = (a[i] + 1) * self.coefficient(tuple(up))
        return Jet(out, self.nvars, self.order - 1)

    def evaluate_offsets(self, d: np.ndarray) -> np.ndarray:
        """把 jet 當作多項式，在位移 d（n×nvars）上求值"""
        return monomials(d, self.order) @ self.coef

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("只能降階")
        return Jet(self.coef[: n_coefficients(self.nvars, order)].copy(), self.nvars, order)

    def linear_substitute(self, R: np.ndarray) -> "Jet":
        """g(d) ↦ g(R d)，R 為 nvars×nvars"""
        R = np.asarray(R)
        zero = [0.0] * self.nvars
        basis = Jet.variables(zero, self.order)
        lines = [sum((R[i, j] * basis[j] for j in range(self.nvars)), Jet.constant(0.0, self.nvars, self.order))
                 for i in range(self.nvars)]
        powers = [[Jet.constant(1.0, self.nvars, self.order)] for _ in range(self.nvars)]
        for i in range(self.nvars):
            for _ in range(self.order):
                powers[i].append(powers[i][-1] * lines[i])
        out = Jet.constant(0.0 * self.value, self.nvars, self.order)
        for k, alpha in enumerate(self.layout.indices):
            c = self.coef[k]
            if c == 0:
                continue
            term = Jet.constant(c, self.nvars, self.order)
            for i, a in enumerate(alpha):
                if a:
                    term = term * powers[i][a]
            out = out + term
        return out

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, value={self.value})"


def univariate(sol_derivs: Callable[[complex, int], Sequence], x: Jet) -> Jet:
    """g∘x，sol_derivs(a, k) 回傳 [g(a), …, g^(k)(a)]"""
    return x.compose(sol_derivs(x.value, x.order))


# 常係數微分算子：Σ c_α ∂^α
@dataclass(frozen=True)
class DiffOperator:
    terms: tuple[tuple[complex, MultiIndex], ...]
    nvars: int = 8

    @classmethod
    def monomial(cls, alpha: MultiIndex, c: complex = 1.0) -> "DiffOperator":
        return cls(((c, tuple(alpha)),), len(alpha))

    def _simplify(self, terms) -> "DiffOperator":
        acc: dict[MultiIndex, complex] = {}
        for c, a in terms:
            acc[a] = acc.get(a, 0) + c
        return DiffOperator(tuple((c, a) for a, c in acc.items() if c != 0), self.nvars)

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        return self._simplify(self.terms + other.terms)

    def __sub__(self, other: "DiffOperator") -> "DiffOperator":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "DiffOperator":
        return DiffOperator(tuple((c * t, a) for t, a in self.terms), self.nvars)

    def __mul__(self, other: "DiffOperator") -> "DiffOperator":
        terms = []
        for c1, a1 in self.terms:
            for c2, a2 in other.terms:
                terms.append((c1 * c2, tuple(x + y for x, y in zip(a1, a2))))
        return self._simplify(terms)

    @property
    def order(self) -> int:
        return max((sum(a) for _, a in self.terms), default=0)

    def apply(self, jet: Jet):
        if jet.order < self.order:
            raise ValueError(f"jet 階數 {jet.order} 低於算子階數 {self.order}")
        return sum(c * jet.derivative(a) for c, a in self.terms)

    def apply_polynomial(self, jet: Jet) -> Jet | None:
        """jet 視為多項式時 ∂(P) 作用後的多項式；次數不足時為 None（恆為 0）"""
        order = jet.order - self.order
        if order < 0:
            return None
        lay = _layout(self.nvars, order)
        out = np.zeros(len(lay.indices), dtype=np.result_type(jet.coef, complex))
        for k, beta in enumerate(lay.indices):
            total = sum(c * jet.derivative(tuple(x + y for x, y in zip(a, beta))) for c, a in self.terms)
            out[k] = total / lay.factorials[k]
        return Jet(out, self.nvars, order)


def _unit(*names: str) -> MultiIndex:
    alpha = [0] * 8
    for n in names:
        alpha[COORDINATES.index(n)] += 1
    return tuple(alpha)


def _partial_q() -> DiffOperator:
    op = DiffOperator((), 8)
    for i in (1, 2):
        for j in (1, 2):
            op = op + DiffOperator.monomial(_unit(f"Y{i}{j}", f"Z{j}{i}"), 4.0)
    return op


def _partial_s() -> DiffOperator:
    det_z = DiffOperator.monomial(_unit("Z11", "Z22")) - DiffOperator.monomial(_unit("Z12", "Z21"))
    det_y = DiffOperator.monomial(_unit("Y11", "Y22")) - DiffOperator.monomial(_unit("Y12", "Y21"))
    return (det_z * det_y).scale(16.0)


PARTIAL_Q = _partial_q()
PARTIAL_S = _partial_s()
PARTIAL_S0 = PARTIAL_Q * PARTIAL_Q - PARTIAL_S.scale(4.0)
OPERATORS = {"Q": PARTIAL_Q, "S": PARTIAL_S, "S0": PARTIAL_S0}


def character_value(P: str, lam1: complex, lam2: complex) -> complex:
    """χ(Q) = λ₁+λ₂、χ(S) = λ₁λ₂、χ(S0) = (λ₁−λ₂)²"""
    lam1, lam2 = complex(lam1), complex(lam2)
    if P == "Q":
        return lam1 + lam2
    if P == "S":
        return lam1 * lam2
    if P == "S0":
        return (lam1 - lam2) ** 2
    raise ValueError(f"未知的不變多項式: {P}")


def block_jets(X: BlockVector, order: int = 4) -> list[Jet]:
    return Jet.variables(list(X.to_vector()), order)


def invariant_jets(coords: Sequence[Jet]) -> tuple[Jet, Jet]:
    """由八個座標 jet 組出 Q 與 S 的 jet"""
    y11, y12, y21, y22, z11, z12, z21, z22 = coords
    Q = y11 * z11 + y12 * z21 + y21 * z12 + y22 * z22
    S = (y11 * y22 - y12 * y21) * (z11 * z22 - z12 * z21)
    return Q, S


@dataclass(frozen=True)
class InvariantPolynomial:
    """把 Q、S 或 S0 本身當作被作用的函數"""

    which: str

    def jet(self, X: BlockVector, order: int = 4) -> Jet:
        Q, S = invariant_jets(block_jets(X, order))
        if self.which == "Q":
            return Q
        if self.which == "S":
            return S
        if self.which == "S0":
            return Q * Q - S * 4.0
        raise ValueError(f"未知的不變多項式: {self.which}")


class TestFunctionJet(QTestFunction):
    """q 上的 bump，附 4 階 jet 與 ∂(P) 的批次閉式"""

    __test__ = False

    def jet(self, X: BlockVector, order: int = 4) -> Jet:
        coords = block_jets(X, order)
        M = self.transform
        d = [sum((M[i, j] * coords[j] for j in range(8)), Jet.constant(0.0, 8, order)) - self.center[i]
             for i in range(8)]
        s = sum((di * di for di in d), Jet.constant(0.0, 8, order)) / self.radius**2
        derivs = [float(v) for v in bump_profile(float(s.value), order)]
        return s.compose(derivs) * self.amplitude

    def partial_P_batch(self, P: str, x: np.ndarray) -> np.ndarray:
        """∂(P)f 的閉式：∂(Q)f = 16g''Q(d)/r⁴，∂(S)f = 256g''''S(d)/r⁸"""
        if not np.array_equal(self.transform, np.eye(8)):
            raise ValueError("閉式只適用於未拉回的 bump")
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = x - self.center
        r2 = self.radius**2
        s = np.sum(d * d, axis=1) / r2
        g = bump_profile(s, 4)
        Qd, Sd = qs_batch(d[:, :4].reshape(-1, 2, 2), d[:, 4:].reshape(-1, 2, 2))
        dq = 16.0 * g[2] * Qd / r2**2
        ds = 256.0 * g[4] * Sd / r2**4
        if P == "Q":
            out = dq
        elif P == "S":
            out = ds
        elif P == "S0":
            dq2 = 256.0 * g[4] * Qd * Qd / r2**4 + 128.0 * g[3] * s / r2**2 + 256.0 * g[2] / r2**2
            out = dq2 - 4.0 * ds
        else:
            raise ValueError(f"未知的不變多項式: {P}")
        return self.amplitude * out

"""
Dunkl 算子
秩 2 根系 {α₁, α₂, β₁, β₂} 上的 T_ξ(k)，多項式上精確計算，jet 上沿 W 軌道計算
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Sequence

import numpy as np

from app.dunkl.polynomial import BivariatePolynomial, delta_polynomial
from app.eigendist.jets import Jet
from app.errors import NotInvariant

logger = logging.getLogger(__name__)

Selector = Literal["Q", "S"]
KShift = Literal["k", "one_minus_k"]
E1 = (1, 0)
E2 = (0, 1)


def _reflection(a: int, b: int) -> np.ndarray:
    """r_α(x) = x − 2⟨α,x⟩/⟨α,α⟩·α 的整數矩陣"""
    v = np.array([a, b])
    return (np.eye(2, dtype=int) * (a * a + b * b) - 2 * np.outer(v, v)) // (a * a + b * b)


@dataclass(frozen=True)
class RootDatum2:
    """正根以 x 座標的線性式表示"""

    roots: dict = field(default_factory=lambda: {
        "alpha1": (2, 0),
        "alpha2": (0, 2),
        "beta1": (1, -1),
        "beta2": (1, 1),
    })

    def reflection(self, name: str) -> np.ndarray:
        return _reflection(*self.roots[name])

    def coroot(self, name: str) -> tuple[Fraction, Fraction]:
        """h_α ∝ α，正規化為 α(h_α) = Q(h_α)，Q(h) = h₁² + h₂²"""
        a, b = self.roots[name]
        return Fraction(a), Fraction(b)

    def pairing(self, name: str, h: Sequence) -> Fraction:
        a, b = self.roots[name]
        return a * Fraction(h[0]) + b * Fraction(h[1])

    def weyl_group(self) -> list[np.ndarray]:
        """由四個反射生成的 8 元群，第一個為單位"""
        gens = [self.reflection(n) for n in self.roots]
        group = [np.eye(2, dtype=int)]
        frontier = list(group)
        while frontier:
            nxt = []
            for g in frontier:
                for r in gens:
                    h = r @ g
                    if not any(np.array_equal(h, x) for x in group):
                        group.append(h)
                        nxt.append(h)
            frontier = nxt
        return group

    def check(self) -> dict:
        a1, a2 = self.roots["alpha1"], self.roots["alpha2"]
        b1, b2 = self.roots["beta1"], self.roots["beta2"]
        return {
            "alpha_pairing": [int(self.pairing(n, self.coroot(n))) for n in ("alpha1", "alpha2")],
            "beta_orthogonal": b1[0] * b2[0] + b1[1] * b2[1] == 0,
            "alpha_strongly_orthogonal": bool(np.array_equal(self.reflection("alpha1") @ np.array(a2), np.array(a2))),
            "alpha_sum_not_root": tuple(x + y for x, y in zip(a1, a2)) not in self.roots.values(),
            "weyl_order": len(self.weyl_group()),
        }


ROOTS = RootDatum2()


@dataclass(frozen=True)
class MultiplicityFunction:
    k_alpha1: Fraction
    k_alpha2: Fraction
    k_beta1: Fraction
    k_beta2: Fraction

    def __post_init__(self):
        for name in ("k_alpha1", "k_alpha2", "k_beta1", "k_beta2"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.k_alpha1 != self.k_alpha2 or self.k_beta1 != self.k_beta2:
            raise ValueError(f"重數函數必須 W 不變：{self}")

    @classmethod
    def of(cls, k_alpha, k_beta) -> "MultiplicityFunction":
        return cls(k_alpha, k_alpha, k_beta, k_beta)

    @classmethod
    def symmetric_pair(cls) -> "MultiplicityFunction":
        """k_α = m_α/2：(½, ½, 1, 1)"""
        return cls.of(Fraction(1, 2), 1)

    def one_minus(self) -> "MultiplicityFunction":
        return MultiplicityFunction(1 - self.k_alpha1, 1 - self.k_alpha2, 1 - self.k_beta1, 1 - self.k_beta2)

    def __getitem__(self, name: str) -> Fraction:
        return getattr(self, f"k_{name}")

    @property
    def is_symmetric_pair(self) -> bool:
        return self == MultiplicityFunction.symmetric_pair()

    def to_dict(self) -> dict:
        return {name: str(self[name]) for name in ROOTS.roots}

    def __str__(self) -> str:
        return f"k=({self.k_alpha1}, {self.k_alpha2}, {self.k_beta1}, {self.k_beta2})"


PAIR_K = MultiplicityFunction.symmetric_pair()


def dunkl_apply(xi: Sequence, k: MultiplicityFunction, p: BivariatePolynomial,
                datum: RootDatum2 = ROOTS) -> BivariatePolynomial:
    """T_ξ(k)p = ∂_ξ p + Σ k_α α(ξ)·(p − r_α p)/α"""
    out = p.directional(xi)
    for name, (a, b) in datum.roots.items():
        weight = k[name] * (a * Fraction(xi[0]) + b * Fraction(xi[1]))
        if weight == 0:
            continue
        diff = p - p.substitute_linear(datum.reflection(name))
        if diff.is_zero():
            continue
        out = out + diff.divide_linear(a, b) * weight
    return out


def dunkl_word(word: Sequence[Sequence], k: MultiplicityFunction, p: BivariatePolynomial) -> BivariatePolynomial:
    """T_{ξ_1}∘…∘T_{ξ_n} p，最右側先作用"""
    for xi in reversed(list(word)):
        p = dunkl_apply(xi, k, p)
    return p


def dunkl_commutator(k: MultiplicityFunction, p: BivariatePolynomial) -> BivariatePolynomial:
    return dunkl_apply(E1, k, dunkl_apply(E2, k, p)) - dunkl_apply(E2, k, dunkl_apply(E1, k, p))


def _residual_operator(selector: Selector, k: MultiplicityFunction, p: BivariatePolynomial) -> BivariatePolynomial:
    # Res(Q) = T_{e₁}² + T_{e₂}²，Res(S) = T_{e₁}²T_{e₂}²
    if selector == "Q":
        return dunkl_word([E1, E1], k, p) + dunkl_word([E2, E2], k, p)
    if selector == "S":
        return dunkl_word([E1, E1, E2, E2], k, p)
    raise ValueError(f"未知選擇子 {selector}")


def require_invariant(p: BivariatePolynomial, datum: RootDatum2 = ROOTS) -> None:
    if not p.is_invariant(datum.weyl_group()):
        raise NotInvariant(f"多項式 {p} 不是 W 不變的")


def radial_q_s(k_shift: KShift, selector: Selector, target: BivariatePolynomial,
               k: MultiplicityFunction = PAIR_K) -> BivariatePolynomial:
    """k_shift="k"：D_p(k)·target；"one_minus_k"：δ⁻¹·D_p(1−k)(δ·target)"""
    require_invariant(target)
    if k_shift == "k":
        return _residual_operator(selector, k, target)
    if k_shift != "one_minus_k":
        raise ValueError(f"未知 k_shift {k_shift}")
    if not k.is_symmetric_pair:
        raise ValueError("δ 共軛只對 k = (½, ½, 1, 1) 成立")
    shifted = _residual_operator(selector, k.one_minus(), delta_polynomial() * target)
    return shifted.divide_linear(1, -1).divide_linear(1, 1)


def opdam_exact(selector: Selector, p: BivariatePolynomial, k: MultiplicityFunction = PAIR_K) -> BivariatePolynomial:
    """D_p(1−k)(δp) − δ·D_p(k)p，應恆為 0"""
    require_invariant(p)
    delta = delta_polynomial()
    return _residual_operator(selector, k.one_minus(), delta * p) - delta * _residual_operator(selector, k, p)


# jet 版本：以 W 軌道上各點的 jet 計算反射差商
@dataclass
class OrbitJets:
    group: list[np.ndarray]
    points: np.ndarray
    jets: list[Jet]

    @property
    def order(self) -> int:
        return self.jets[0].order

    def index(self, M: np.ndarray) -> int:
        for i, g in enumerate(self.group):
            if np.array_equal(g, M):
                return i
        raise KeyError("矩陣不在 Weyl 群內")

    @property
    def value(self) -> complex:
        return complex(self.jets[0].value)

    def __add__(self, other: "OrbitJets") -> "OrbitJets":
        return OrbitJets(self.group, self.points, [a + b for a, b in zip(self.jets, other.jets)])


def orbit_jets(fn: Callable[[Jet, Jet], Jet], point: Sequence[float], order: int,
               datum: RootDatum2 = ROOTS) -> OrbitJets:
    group = datum.weyl_group()
    x = np.asarray(point, dtype=float)
    points = np.array([g @ x for g in group])
    jets = [fn(*Jet.variables(y, order)) for y in points]
    jets = [j if isinstance(j, Jet) else Jet.constant(j, 2, order) for j in jets]
    return OrbitJets(group, points, jets)


def dunkl_apply_jet(xi: Sequence[float], k: MultiplicityFunction, orbit: OrbitJets,
                    datum: RootDatum2 = ROOTS) -> OrbitJets:
    """T_ξ(k) 作用在軌道 jet 上，階數降一"""
    if orbit.order == 0:
        raise ValueError("jet 階數不足")
    new_order = orbit.order - 1
    out = []
    for i, (g, y, J) in enumerate(zip(orbit.group, orbit.points, orbit.jets)):
        acc = J.partial(0) * float(xi[0]) + J.partial(1) * float(xi[1])
        X1, X2 = Jet.variables(y, orbit.order)
        for name, (a, b) in datum.roots.items():
            weight = float(k[name]) * (a * float(xi[0]) + b * float(xi[1]))
            if weight == 0:
                continue
            R = datum.reflection(name)
            mirrored = orbit.jets[orbit.index(R @ g)].linear_substitute(R)
            quotient = (J - mirrored) / (a * X1 + b * X2)
            acc = acc + quotient.truncate(new_order) * weight
        out.append(acc)
    return OrbitJets(orbit.group, orbit.points, out)


def dunkl_value(selector: Selector, k: MultiplicityFunction, fn: Callable[[Jet, Jet], Jet],
                point: Sequence[float]) -> complex:
    """D_p(k)f(point)，f 為 W 不變函數"""
    if selector == "Q":
        base = orbit_jets(fn, point, 2)
        words = [[E1, E1], [E2, E2]]
    elif selector == "S":
        base = orbit_jets(fn, point, 4)
        words = [[E1, E1, E2, E2]]
    else:
        raise ValueError(f"未知選擇子 {selector}")
    total = 0j
    for word in words:
        orbit = base
        for xi in reversed(word):
            orbit = dunkl_apply_jet(xi, k, orbit)
        total += orbit.value
    return total

"""
二變數有理係數多項式
以 {(i, j): Fraction} 稀疏儲存，支援反射代換與除以線性式的精確除法
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from app.errors import DivisionFailure

Exponent = tuple[int, int]

DEGREE_CAP = 64


def _exact(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, numbers.Integral):
        return Fraction(int(c))
    if isinstance(c, numbers.Rational):
        return Fraction(c.numerator, c.denominator)
    raise TypeError(f"係數必須是有理數，收到 {type(c).__name__}")


class BivariatePolynomial:
    """x₁、x₂ 的多項式；不儲存零係數"""

    __slots__ = ("cs",)

    def __init__(self, cs: Mapping[Exponent, object] | None = None):
        coefs = {}
        for key, value in (cs or {}).items():
            value = _exact(value)
            if value == 0:
                continue
            i, j = (int(k) for k in key)
            if i < 0 or j < 0:
                raise ValueError(f"指數不可為負：{key}")
            if i + j > DEGREE_CAP:
                raise ValueError(f"次數 {i + j} 超過上限 {DEGREE_CAP}")
            coefs[(i, j)] = value
        self.cs = coefs

    @classmethod
    def promote(cls, item) -> "BivariatePolynomial":
        if isinstance(item, BivariatePolynomial):
            return item
        return cls({(0, 0): _exact(item)})

    @classmethod
    def zero(cls) -> "BivariatePolynomial":
        return cls({})

    @classmethod
    def one(cls) -> "BivariatePolynomial":
        return cls({(0, 0): 1})

    @classmethod
    def x1(cls) -> "BivariatePolynomial":
        return cls({(1, 0): 1})

    @classmethod
    def x2(cls) -> "BivariatePolynomial":
        return cls({(0, 1): 1})

    @classmethod
    def linear(cls, a, b) -> "BivariatePolynomial":
        return cls({(1, 0): a, (0, 1): b})

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.cs), default=-1)

    def is_zero(self) -> bool:
        return not self.cs

    def __eq__(self, other) -> bool:
        return self.cs == self.promote(other).cs

    def __ne__(self, other) -> bool:
        return not self == other

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.cs.items())))

    def __add__(self, other) -> "BivariatePolynomial":
        other = self.promote(other)
        cs = dict(self.cs)
        for key, value in other.cs.items():
            cs[key] = cs.get(key, 0) + value
        return BivariatePolynomial(cs)

    __radd__ = __add__

    def __neg__(self) -> "BivariatePolynomial":
        return BivariatePolynomial({k: -v for k, v in self.cs.items()})

    def __sub__(self, other) -> "BivariatePolynomial":
        return self + (-self.promote(other))

    def __rsub__(self, other) -> "BivariatePolynomial":
        return self.promote(other) - self

    def __mul__(self, other) -> "BivariatePolynomial":
        if not isinstance(other, BivariatePolynomial):
            r = _exact(other)
            return BivariatePolynomial({k: r * v for k, v in self.cs.items()})
        cs: dict[Exponent, Fraction] = {}
        for (i1, j1), v1 in self.cs.items():
            for (i2, j2), v2 in other.cs.items():
                k = (i1 + i2, j1 + j2)
                cs[k] = cs.get(k, 0) + v1 * v2
        return BivariatePolynomial(cs)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "BivariatePolynomial":
        if n < 0:
            raise ValueError("只支援非負整數次方")
        out = BivariatePolynomial.one()
        for _ in range(n):
            out = out * self
        return out

    def derivative(self, var: int) -> "BivariatePolynomial":
        """var = 0 對 x₁，var = 1 對 x₂"""
        cs = {}
        for (i, j), v in self.cs.items():
            e = (i, j)[var]
            if e == 0:
                continue
            key = (i - 1, j) if var == 0 else (i, j - 1)
            cs[key] = v * e
        return BivariatePolynomial(cs)

    def directional(self, xi: Iterable) -> "BivariatePolynomial":
        a, b = (_exact(c) for c in xi)
        return self.derivative(0) * a + self.derivative(1) * b

    def substitute_linear(self, R) -> "BivariatePolynomial":
        """p(x) ↦ p(R x)，R 為整數或有理 2×2 矩陣"""
        (a, b), (c, d) = ((_exact(v) for v in row) for row in R)
        y1 = BivariatePolynomial.linear(a, b)
        y2 = BivariatePolynomial.linear(c, d)
        cache1 = [BivariatePolynomial.one()]
        cache2 = [BivariatePolynomial.one()]
        out = BivariatePolynomial.zero()
        for (i, j), v in self.cs.items():
            while len(cache1) <= i:
                cache1.append(cache1[-1] * y1)
            while len(cache2) <= j:
                cache2.append(cache2[-1] * y2)
            out = out + cache1[i] * cache2[j] * v
        return out

    def divide_linear(self, a, b) -> "BivariatePolynomial":
        """精確除以 a·x₁ + b·x₂；有餘式時拋出 DivisionFailure"""
        a, b = _exact(a), _exact(b)
        if a == 0 and b == 0:
            raise DivisionFailure("除以零線性式")
        rem = dict(self.cs)
        quot: dict[Exponent, Fraction] = {}
        # 以 x₂（b ≠ 0）或 x₁ 為主變數做綜合除法
        lead = 1 if b != 0 else 0
        c_lead, c_other = (b, a) if lead == 1 else (a, b)
        while rem:
            key = max(rem, key=lambda k: (k[lead], k[1 - lead]))
            c = rem.pop(key)
            if key[lead] == 0:
                raise DivisionFailure(f"除以 {a}·x₁ + {b}·x₂ 有非零餘式")
            factor = c / c_lead
            qkey = (key[0], key[1] - 1) if lead == 1 else (key[0] - 1, key[1])
            quot[qkey] = quot.get(qkey, 0) + factor
            if c_other != 0:
                skey = (qkey[0] + 1, qkey[1]) if lead == 1 else (qkey[0], qkey[1] + 1)
                val = rem.get(skey, 0) - factor * c_other
                if val == 0:
                    rem.pop(skey, None)
                else:
                    rem[skey] = val
        return BivariatePolynomial(quot)

    def evaluate(self, x1, x2):
        """x₁、x₂ 可為 Fraction、float、complex 或陣列"""
        total = 0
        for (i, j), v in self.cs.items():
            coef = v if isinstance(x1, Fraction) and isinstance(x2, Fraction) else float(v)
            total = total + coef * x1**i * x2**j
        return total

    __call__ = evaluate

    def is_invariant(self, matrices: Iterable) -> bool:
        return all(self.substitute_linear(R) == self for R in matrices)

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int, density: float = 0.6, span: int = 9) -> "BivariatePolynomial":
        """總次數 ≤ degree 的隨機整數係數多項式"""
        cs = {}
        for i in range(degree + 1):
            for j in range(degree + 1 - i):
                if rng.random() < density:
                    cs[(i, j)] = Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, 4)))
        return cls(cs)

    @classmethod
    def random_invariant(cls, rng: np.random.Generator, degree: int, span: int = 5) -> "BivariatePolynomial":
        """以 e₁ = x₁² + x₂²、e₂ = x₁²x₂² 組出的 W 不變多項式"""
        e1 = cls({(2, 0): 1, (0, 2): 1})
        e2 = cls({(2, 2): 1})
        out = cls.zero()
        for a in range(degree // 2 + 1):
            for b in range((degree - 2 * a) // 4 + 1):
                c = int(rng.integers(-span, span + 1))
                if c:
                    out = out + (e1**a) * (e2**b) * c
        return out

    def to_dict(self) -> dict:
        return {f"{i},{j}": str(v) for (i, j), v in sorted(self.cs.items())}

    def __str__(self) -> str:
        if not self.cs:
            return "0"
        terms = []
        for (i, j), v in sorted(self.cs.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), kv[0])):
            mono = "".join(
                name if e == 1 else f"{name}^{e}" for name, e in (("x1", i), ("x2", j)) if e
            )
            if not mono:
                terms.append(str(v))
            elif v == 1:
                terms.append(mono)
            else:
                terms.append(f"{v}*{mono}")
        return " + ".join(terms).replace("+ -", "- ")

    __repr__ = __str__


def delta_polynomial() -> BivariatePolynomial:
    """δ = x₁² − x₂² = β₁β₂"""
    return BivariatePolynomial({(2, 0): 1, (0, 2): -1})


def binomial_expand(a, b, n: int) -> BivariatePolynomial:
    """(a·x₁ + b·x₂)ⁿ"""
    return BivariatePolynomial({(n - k, k): math.comb(n, k) * _exact(a) ** (n - k) * _exact(b) ** k for k in range(n + 1)})

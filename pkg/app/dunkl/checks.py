"""
移位恆等式的數值檢查
D_p(k)f 由軌道 jet 精確計算，c⁻¹·D_p(1−k)(c·f) 由差分計算
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from app.algebra.cartan import CartanClass
from app.dunkl.functions import InvariantTestFunction
from app.dunkl.operators import ROOTS, MultiplicityFunction, Selector, dunkl_value
from app.dunkl.radial import check_stencil, dunkl_radial_operator, step_for

logger = logging.getLogger(__name__)

Conjugator = Literal["delta", "I"]


def conjugator_function(which: Conjugator, k: MultiplicityFunction):
    """δ = x₁² − x₂²，或 I(k−½) = Π|α(x)|^{2(k_α−½)}"""
    if which == "delta":
        return lambda x1, x2: x1 * x1 - x2 * x2
    if which != "I":
        raise ValueError(f"未知共軛子 {which}")

    def fn(x1, x2):
        out = np.ones(np.broadcast(x1, x2).shape)
        for name, (a, b) in ROOTS.roots.items():
            out = out * np.abs(a * x1 + b * x2) ** (2.0 * (float(k[name]) - 0.5))
        return out

    return fn


@dataclass
class OpdamPoint:
    point: tuple[float, float]
    dunkl_side: complex
    shifted_side: complex
    fd_error: float
    shifted_direct: complex
    value: complex

    @property
    def residual(self) -> float:
        return abs(self.dunkl_side - self.shifted_side)

    def to_dict(self) -> dict:
        return {
            "point": list(self.point),
            "dunkl_side": {"re": self.dunkl_side.real, "im": self.dunkl_side.imag},
            "shifted_side": {"re": self.shifted_side.real, "im": self.shifted_side.imag},
            "fd_error": self.fd_error,
            "residual": self.residual,
        }


@dataclass
class OpdamReport:
    selector: str
    k: MultiplicityFunction
    conjugator: str
    function: str
    points: list[OpdamPoint] = field(default_factory=list)
    eigen: complex | None = None

    @property
    def max_residual(self) -> float:
        return max((p.residual for p in self.points), default=0.0)

    @property
    def max_relative_residual(self) -> float:
        return max((p.residual / (1.0 + abs(p.dunkl_side)) for p in self.points), default=0.0)

    @property
    def max_eigen_residual_dunkl(self) -> float | None:
        """max |D_p(k)f − eigen·f|"""
        if self.eigen is None:
            return None
        return max((abs(p.dunkl_side - self.eigen * p.value) for p in self.points), default=0.0)

    @property
    def max_eigen_residual_shifted(self) -> float | None:
        """max |D_p(1−k)f − eigen·f|"""
        if self.eigen is None:
            return None
        return max((abs(p.shifted_direct - self.eigen * p.value) for p in self.points), default=0.0)

    def to_dict(self) -> dict:
        out = {
            "selector": self.selector,
            "k": self.k.to_dict(),
            "conjugator": self.conjugator,
            "function": self.function,
            "max_residual": self.max_residual,
            "max_relative_residual": self.max_relative_residual,
            "points": [p.to_dict() for p in self.points],
        }
        if self.eigen is not None:
            out["eigen"] = {"re": self.eigen.real, "im": self.eigen.imag}
            out["max_eigen_residual_dunkl"] = self.max_eigen_residual_dunkl
            out["max_eigen_residual_shifted"] = self.max_eigen_residual_shifted
        return out


def opdam_check(selector: Selector, k: MultiplicityFunction, test_fn: InvariantTestFunction,
                points: Sequence[Sequence[float]], conjugator: Conjugator = "delta",
                eigen: complex | None = None, h: float | None = None, margin: float | None = None) -> OpdamReport:
    """在每個樣本點比較 D_p(k)f 與 c⁻¹·D_p(1−k)(c·f)"""
    shifted = k.one_minus()
    op = dunkl_radial_operator(selector, float(shifted["alpha1"]), float(shifted["beta1"]))
    conj = conjugator_function(conjugator, k)
    report = OpdamReport(selector, k, conjugator, test_fn.name, eigen=None if eigen is None else complex(eigen))
    for point in points:
        x = (float(point[0]), float(point[1]))
        step = step_for(op.order, x) if h is None else h
        check_stencil(CartanClass.APP, x, step, margin)
        dunkl = dunkl_value(selector, k, test_fn, x)
        c0 = complex(np.asarray(conj(np.array([x[0]]), np.array([x[1]]))).ravel()[0])
        fd = op.apply(lambda a, b: conj(a, b) * test_fn(a, b), x, step)
        direct = op.apply(test_fn, x, step)
        value = complex(np.asarray(test_fn(np.array([x[0]]), np.array([x[1]])), dtype=complex).ravel()[0])
        report.points.append(OpdamPoint(x, dunkl, fd.value / c0, fd.error / abs(c0), direct.value, value))
    logger.info(f"opdam_check {selector} {k} [{conjugator}] {test_fn.name}：最大殘差 {report.max_residual:.3e}")
    return report

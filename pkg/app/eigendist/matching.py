"""
銜接條件
Ψ_m 在 t₂ = 0 兩側的 [0]、[1] 部分，以及 a₂ 與 a₊₊ 在 θ = 0⁺ 的銜接（含 ϖ 側）
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from app.config import settings
from app.eigendist.basis import BasisFunction, RadialComponents, radial
from app.errors import DegenerateFit, FitFailure, InsufficientBins
from app.meanfn.fit import ExpansionFit, fit_sampled_profile, log_eta, probes

logger = logging.getLogger(__name__)

Side = Literal["direct", "varpi"]


def _components(obj: BasisFunction | RadialComponents) -> RadialComponents:
    return obj if isinstance(obj, RadialComponents) else radial(obj)


def _enc(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def richardson_limit(values: Sequence[complex], step_ratio: float = 2.0) -> tuple[complex, float]:
    """步長依 step_ratio 遞減的序列外插到 0；誤差取最後兩層對角元之差"""
    if len(values) < 2:
        raise FitFailure("Richardson 外插至少需要兩個步長")
    last = [complex(v) for v in values]
    diagonal = [last[-1]]
    for m in range(1, len(values)):
        mult = step_ratio**m
        last = [(mult * last[i + 1] - last[i]) / (mult - 1.0) for i in range(len(last) - 1)]
        diagonal.append(last[-1])
    return diagonal[-1], abs(diagonal[-1] - diagonal[-2])


def _steps(h0: float, levels: int) -> np.ndarray:
    return h0 * 0.5 ** np.arange(levels)


def _finite(values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(values)):
        raise FitFailure(f"{what} 在探測點上出現非有限值")
    return values


def one_sided_limit(fn: Callable[[np.ndarray], np.ndarray], h0: float, levels: int | None = None) -> tuple[complex, float]:
    """lim_{h→0⁺} fn(h)"""
    levels = settings.match_levels if levels is None else levels
    h = _steps(h0, levels)
    return richardson_limit(_finite(fn(h), "單側極限"))


def one_sided_derivative(fn: Callable[[np.ndarray], np.ndarray], h0: float,
                         levels: int | None = None) -> tuple[complex, float]:
    """fn′(0⁺)，以 (fn(2h) − fn(h))/h 外插，不需要 fn(0)"""
    levels = settings.match_levels if levels is None else levels
    h = _steps(h0, levels)
    values = _finite(fn(2.0 * h), "單側導數") - _finite(fn(h), "單側導數")
    return richardson_limit(values / h)


def _fit(t: np.ndarray, values: np.ndarray, degree: int) -> ExpansionFit:
    try:
        return fit_sampled_profile(t, _finite(values, "Ψ(t₁, ·)"), log_eta, degree)
    except (InsufficientBins, DegenerateFit) as exc:
        raise FitFailure(f"log 擬合失敗：{exc}") from exc


@dataclass
class SideLimits:
    """u^{[0]}(0±) 與 u^{[1]}(0±)，誤差含半視窗系統差"""

    part0: complex
    part1: complex
    error0: float
    error1: float

    def to_dict(self) -> dict:
        return {"part0": _enc(self.part0), "part1": _enc(self.part1), "error0": self.error0, "error1": self.error1}


def _side_limits(fn: Callable[[np.ndarray], np.ndarray], side: str, t_min: float, t_max: float,
                 n: int, degree: int) -> SideLimits:
    fits = []
    for scale in (1.0, 0.5):
        t = probes(t_min, t_max * scale, n, side)
        fits.append(_fit(t, fn(t), degree))
    main, half = fits
    a, b = complex(main.a[0]), complex(main.b[0])
    err0 = float(np.hypot(main.a_err[0], abs(a - complex(half.a[0]))))
    err1 = float(np.hypot(main.b_err[0], abs(b - complex(half.b[0]))))
    return SideLimits(a, b, err0, err1)


@dataclass
class MatchingMReport:
    function: str
    t1: float
    plus: SideLimits
    minus: SideLimits
    tol: float

    @property
    def jump0(self) -> float:
        return abs(self.plus.part0 - self.minus.part0)

    @property
    def jump1(self) -> float:
        return abs(self.plus.part1 - self.minus.part1)

    @property
    def scale(self) -> float:
        return 1.0 + max(abs(self.plus.part0), abs(self.minus.part0), abs(self.plus.part1), abs(self.minus.part1))

    @property
    def passed(self) -> bool:
        return self.jump0 <= self.tol * self.scale and self.jump1 <= self.tol * self.scale

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "t1": self.t1,
            "plus": self.plus.to_dict(),
            "minus": self.minus.to_dict(),
            "jump0": self.jump0,
            "jump1": self.jump1,
            "scale": self.scale,
            "tol": self.tol,
            "passed": self.passed,
        }


def matching_m(bf: BasisFunction | RadialComponents, t1: float, tol: float = 1e-6, degree: int | None = None,
               t_min: float | None = None, t_max: float | None = None, n: int | None = None) -> MatchingMReport:
    """t ↦ Ψ_m(t₁, t) 在 0± 的 a + log|t|·b 擬合，比較兩側的 [0]、[1] 部分"""
    degree = settings.match_degree if degree is None else degree
    t_min = settings.match_t_min if t_min is None else t_min
    t_max = settings.match_t_max if t_max is None else t_max
    n = settings.fit_probes if n is None else n
    t1 = float(t1)
    if t1 == 0:
        raise ValueError("t₁ 不可為 0")
    if abs(t1) <= 2.0 * t_max:
        raise ValueError(f"|t₁| = {abs(t1)} 太接近探測視窗 {t_max}")
    rc = _components(bf)

    def fn(t: np.ndarray) -> np.ndarray:
        return rc.psi_m(np.full(t.shape, t1), t)

    plus = _side_limits(fn, "right", t_min, t_max, n, degree)
    minus = _side_limits(fn, "left", t_min, t_max, n, degree)
    report = MatchingMReport(rc.name, t1, plus, minus, tol)
    logger.info(f"matching_m {rc.name} t₁={t1}: 跳躍 [0] {report.jump0:.3e}，[1] {report.jump1:.3e}")
    return report


@dataclass
class Matching2Report:
    function: str
    tau: float
    side: str
    limit: complex
    limit_error: float
    mismatch: complex
    mismatch_error: float
    tol_limit: float
    tol_deriv: float
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return abs(self.limit) <= self.tol_limit and abs(self.mismatch) <= self.tol_deriv

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "tau": self.tau,
            "side": self.side,
            "limit": _enc(self.limit),
            "limit_abs": abs(self.limit),
            "limit_error": self.limit_error,
            "mismatch": _enc(self.mismatch),
            "mismatch_abs": abs(self.mismatch),
            "mismatch_error": self.mismatch_error,
            "tol_limit": self.tol_limit,
            "tol_deriv": self.tol_deriv,
            "passed": self.passed,
            **self.extra,
        }


def _side_functions(rc: RadialComponents, tau: float, side: Side):
    """回傳 θ ↦ (Ψ_m)_r(τ,θ) 與 θ ↦ Ψ₂(τ,θ)，ϖ 側換成 Ψ̌_m、Ψ̌₂"""
    if side == "direct":
        return (lambda th: rc.psi_m_r(np.full(th.shape, tau), th),
                lambda th: rc.psi_2(np.full(th.shape, tau), th))
    if side == "varpi":
        def check_r(th):
            return rc.psi_m(-((tau + th) ** 2), -((tau - th) ** 2))

        return check_r, lambda th: rc.psi_2(th, np.full(th.shape, tau))
    raise ValueError(f"未知的側：{side}")


def matching_2(bf: BasisFunction | RadialComponents, tau: float, side: Side = "direct",
               tol_limit: float = 1e-8, tol_deriv: float = 1e-5, h0: float | None = None,
               levels: int | None = None) -> Matching2Report:
    """Ψ₂(τ, 0⁺) 與 ∂θ(Ψ_m)_r(τ,0⁺) − ∂θΨ₂(τ,0⁺)"""
    tau = float(tau)
    if not tau > 0:
        raise ValueError(f"τ 必須為正：{tau}")
    h0 = 0.05 * tau if h0 is None else h0
    rc = _components(bf)
    psi_r, psi_2 = _side_functions(rc, tau, side)
    limit, limit_err = one_sided_limit(psi_2, h0, levels)
    d_r, d_r_err = one_sided_derivative(psi_r, h0, levels)
    d_2, d_2_err = one_sided_derivative(psi_2, h0, levels)
    report = Matching2Report(
        rc.name, tau, side, limit, limit_err, d_r - d_2, float(np.hypot(d_r_err, d_2_err)), tol_limit, tol_deriv,
        {"d_theta_r": _enc(d_r), "d_theta_2": _enc(d_2)},
    )
    logger.info(f"matching_2 {rc.name} [{side}] τ={tau}: |Ψ₂(τ,0⁺)| {abs(limit):.3e}，導數差 {abs(d_r - d_2):.3e}")
    return report

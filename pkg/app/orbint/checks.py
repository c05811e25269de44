"""
奇異結構檢查
Mf_m 在 t₂ = 0 兩側的 A + B·log|t₂| 擬合，以及 a₂ 與 a₊₊ 在 θ = 0⁺ 的銜接
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from app.config import settings
from app.meanfn.fit import ExpansionFit, PolynomialFit, fit_binned_profile, fit_polynomial_profile, log_eta, window_mask
from app.orbint.densities import OrbitalDensities

logger = logging.getLogger(__name__)


def _bin_index(edges: np.ndarray, value: float) -> int:
    i = int(np.searchsorted(edges, value, side="right")) - 1
    if not 0 <= i < len(edges) - 1:
        raise ValueError(f"探測值 {value} 不在網格範圍 [{edges[0]}, {edges[-1]}] 內")
    return i


@dataclass
class HLogReport:
    t1_probe: float
    plus: ExpansionFit
    minus: ExpansionFit
    sigma_level: float
    extra: dict = field(default_factory=dict)

    @property
    def jump_A(self) -> float:
        return abs(self.plus.phi0_limit - self.minus.phi0_limit)

    @property
    def jump_A_err(self) -> float:
        return float(np.hypot(self.plus.phi0_error, self.minus.phi0_error))

    @property
    def jump_B(self) -> float:
        return abs(self.plus.phi1_limit - self.minus.phi1_limit)

    @property
    def jump_B_err(self) -> float:
        return float(np.hypot(self.plus.phi1_error, self.minus.phi1_error))

    @property
    def passed(self) -> bool:
        return self.jump_A <= self.sigma_level * self.jump_A_err and self.jump_B <= self.sigma_level * self.jump_B_err

    def to_dict(self) -> dict:
        return {
            "t1_probe": self.t1_probe,
            "plus": self.plus.to_dict(),
            "minus": self.minus.to_dict(),
            "jump_A": self.jump_A,
            "jump_A_err": self.jump_A_err,
            "jump_B": self.jump_B,
            "jump_B_err": self.jump_B_err,
            "passed": self.passed,
            **self.extra,
        }


def hlog_check(
    dens: OrbitalDensities,
    t1_probe: float,
    t_min: float | None = None,
    t_max: float | None = None,
    sigma_level: float | None = None,
) -> HLogReport:
    """在 t₁ = t1_probe 的列上，兩側分別擬合 Mf_m ≈ A + B·log|t₂|"""
    if t1_probe == 0:
        raise ValueError("t1_probe 不可為 0")
    t_min = settings.fit_t_min if t_min is None else t_min
    t_max = settings.fit_t_max if t_max is None else t_max
    sigma_level = settings.sigma_level if sigma_level is None else sigma_level
    if dens.is_zero():
        return HLogReport(t1_probe, ExpansionFit.zero(), ExpansionFit.zero(), sigma_level)

    edges1, edges2 = dens.grid_m.edges
    i = _bin_index(edges1, t1_probe)
    values, errors = dens.mf_m[i], dens.mf_m_err[i]
    lo, hi = edges2[:-1], edges2[1:]
    fits = {}
    for side in ("right", "left"):
        mask = window_mask(lo, hi, side, t_min, t_max)
        fits[side] = fit_binned_profile(lo[mask], hi[mask], values[mask], errors[mask], log_eta, degree=0)
    report = HLogReport(t1_probe, fits["right"], fits["left"], sigma_level,
                        {"t1_bin": [float(edges1[i]), float(edges1[i + 1])]})
    logger.info(f"H²_log 檢查 t₁={t1_probe}: ΔA={report.jump_A:.3g}±{report.jump_A_err:.2g}，"
                f"ΔB={report.jump_B:.3g}±{report.jump_B_err:.2g}")
    return report


@dataclass
class HypairReport:
    tau_probe: float
    fit_r: PolynomialFit
    fit_2: PolynomialFit
    sigma_level: float
    extra: dict = field(default_factory=dict)

    @property
    def continuity_gap(self) -> float:
        return abs(float(self.fit_r.coef[0] - self.fit_2.coef[0]))

    @property
    def continuity_err(self) -> float:
        return float(np.hypot(self.fit_r.err[0], self.fit_2.err[0]))

    @property
    def slope_2(self) -> float:
        """Mf₂ 在 θ → 0⁺ 的一次係數"""
        return float(self.fit_2.coef[1])

    @property
    def slope_2_err(self) -> float:
        return float(self.fit_2.err[1])

    @property
    def slope_r(self) -> float:
        return float(self.fit_r.coef[1])

    @property
    def slope_r_err(self) -> float:
        return float(self.fit_r.err[1])

    @property
    def passed(self) -> bool:
        return (self.continuity_gap <= self.sigma_level * self.continuity_err
                and abs(self.slope_r) <= self.sigma_level * self.slope_r_err)

    def to_dict(self) -> dict:
        return {
            "tau_probe": self.tau_probe,
            "continuity_gap": self.continuity_gap,
            "continuity_err": self.continuity_err,
            "slope_2": self.slope_2,
            "slope_2_err": self.slope_2_err,
            "slope_r": self.slope_r,
            "slope_r_err": self.slope_r_err,
            "passed": self.passed,
            "fit_r": self.fit_r.to_dict(),
            "fit_2": self.fit_2.to_dict(),
            **self.extra,
        }


def hypair_check(
    dens: OrbitalDensities,
    tau_probe: float,
    theta_max: float = 0.3,
    degree: int = 2,
    sigma_level: float | None = None,
) -> HypairReport:
    """在 τ = tau_probe 比較 (Mf_m)_r(τ, 0⁺) 與 Mf₂(τ, 0⁺)，並擬合兩者的 θ 一次係數"""
    if tau_probe <= 0:
        raise ValueError("tau_probe 必須為正")
    sigma_level = settings.sigma_level if sigma_level is None else sigma_level
    if dens.is_zero():
        return HypairReport(tau_probe, PolynomialFit.zero(degree), PolynomialFit.zero(degree), sigma_level)
    if not np.array_equal(dens.grid_r.edges[0], dens.grid_2.edges[0]):
        raise ValueError("grid_r 與 grid_2 的 τ 分箱必須相同")

    fits = []
    for grid, mf, mf_err in ((dens.grid_r, dens.mf_r, dens.mf_r_err), (dens.grid_2, dens.mf_2, dens.mf_2_err)):
        edges_tau, edges_theta = grid.edges
        i = _bin_index(edges_tau, tau_probe)
        lo, hi = edges_theta[:-1], edges_theta[1:]
        mask = (lo >= 0) & (hi <= theta_max * (1 + 1e-12))
        fits.append(fit_polynomial_profile(lo[mask], hi[mask], mf[i][mask], mf_err[i][mask], degree))
    report = HypairReport(tau_probe, fits[0], fits[1], sigma_level, {"theta_max": theta_max})
    logger.info(f"H_Y^pair 檢查 τ={tau_probe}: 銜接差 {report.continuity_gap:.3g}±{report.continuity_err:.2g}，"
                f"Mf₂ 斜率 {report.slope_2:.3g}")
    return report

"""
奇異展開擬合
density(t) ≈ φ₀(t) + η(t)φ₁(t)，φ₀、φ₁ 以低階多項式近似
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from app.config import settings
from app.errors import DegenerateFit, InsufficientBins
from app.meanfn.density import DensityGrid, mean_density
from app.meanfn.sampling import SampleableFunction
from app.meanfn.signature import Signature, eta_array, predicted_coefficient

logger = logging.getLogger(__name__)

EtaFn = Callable[[np.ndarray], np.ndarray]
Side = Literal["left", "right", "both"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def log_eta(t: np.ndarray) -> np.ndarray:
    return np.log(np.abs(t))


@dataclass
class ExpansionFit:
    a: np.ndarray
    b: np.ndarray
    a_err: np.ndarray
    b_err: np.ndarray
    chi2: float
    n_bins: int
    systematic_a: float = 0.0
    systematic_b: float = 0.0
    window: tuple[float, float] = (0.0, 0.0)
    extra: dict = field(default_factory=dict)

    @property
    def phi0_limit(self) -> float:
        return float(self.a[0])

    @property
    def phi1_limit(self) -> float:
        return float(self.b[0])

    @property
    def phi0_error(self) -> float:
        return float(np.hypot(self.a_err[0], self.systematic_a))

    @property
    def phi1_error(self) -> float:
        return float(np.hypot(self.b_err[0], self.systematic_b))

    @classmethod
    def zero(cls, degree: int = 0) -> "ExpansionFit":
        z = np.zeros(degree + 1)
        return cls(z, z.copy(), z.copy(), z.copy(), 0.0, 0)

    def to_dict(self) -> dict:
        return {
            "phi0_limit": self.phi0_limit,
            "phi1_limit": self.phi1_limit,
            "phi0_error": self.phi0_error,
            "phi1_error": self.phi1_error,
            "chi2": self.chi2,
            "n_bins": self.n_bins,
            "window": list(self.window),
        }


def _bin_average(fn: EtaFn, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return 0.5 * np.sum(_GL_WEIGHTS[None, :] * fn(pts), axis=1)


def _design(lo, hi, eta_fn: EtaFn, degree: int, averaged: bool) -> np.ndarray:
    cols = []
    for j in range(degree + 1):
        poly = (lambda t, j=j: t**j)
        sing = (lambda t, j=j: eta_fn(t) * t**j)
        if averaged:
            cols.append(_bin_average(poly, lo, hi))
            cols.append(_bin_average(sing, lo, hi))
        else:
            cols.append(poly(lo))
            cols.append(sing(lo))
    return np.stack(cols, axis=1)


def _weighted_lstsq(A: np.ndarray, y: np.ndarray, sigma: np.ndarray | None) -> tuple[np.ndarray, np.ndarray, float]:
    n_par = A.shape[1]
    if A.shape[0] < n_par + 1:
        raise InsufficientBins(f"視窗內只有 {A.shape[0]} 個點，至少需要 {n_par + 1}")
    w = np.ones(len(y)) if sigma is None else 1.0 / sigma
    Aw = A * w[:, None]
    yw = y * w
    col_scale = np.linalg.norm(Aw, axis=0)
    if np.any(col_scale == 0):
        raise DegenerateFit("設計矩陣含零欄")
    An = Aw / col_scale
    if np.linalg.matrix_rank(An, tol=1e-10) < n_par:
        raise DegenerateFit("η 在視窗內數值上為常數或與多項式項共線")
    coef, *_ = np.linalg.lstsq(An, yw, rcond=None)
    resid = yw - An @ coef
    dof = max(len(y) - n_par, 1)
    chi2 = float(resid @ resid)
    cov = np.linalg.inv(An.T @ An)
    if sigma is None:
        cov = cov * chi2 / dof
    coef = coef / col_scale
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None)) / col_scale
    return coef, err, chi2 / dof


def _solve(A: np.ndarray, y: np.ndarray, sigma: np.ndarray | None, degree: int) -> ExpansionFit:
    coef, err, chi2 = _weighted_lstsq(A, y, sigma)
    return ExpansionFit(coef[0::2], coef[1::2], err[0::2], err[1::2], chi2, len(y))


def fit_binned_profile(
    lo: np.ndarray,
    hi: np.ndarray,
    values: np.ndarray,
    errors: np.ndarray,
    eta_fn: EtaFn,
    degree: int = 0,
) -> ExpansionFit:
    """對分箱剖面做加權最小平方，基底取箱內平均"""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    values, errors = np.asarray(values, float), np.asarray(errors, float)
    if not np.any(values):
        return ExpansionFit.zero(degree)
    positive = errors[errors > 0]
    floor = float(np.min(positive)) if positive.size else 1.0
    sigma = np.where(errors > 0, errors, floor)
    A = _design(lo, hi, eta_fn, degree, averaged=True)
    return _solve(A, values, sigma, degree)


def fit_sampled_profile(t: np.ndarray, values: np.ndarray, eta_fn: EtaFn, degree: int = 1) -> ExpansionFit:
    """在探測點上直接擬合 a(t) + η(t)b(t)"""
    t = np.asarray(t, float)
    values = np.asarray(values)
    A = _design(t, t, eta_fn, degree, averaged=False)
    if np.iscomplexobj(values):
        re = _solve(A, values.real, None, degree)
        im = _solve(A, values.imag, None, degree)
        return ExpansionFit(
            re.a + 1j * im.a,
            re.b + 1j * im.b,
            np.hypot(re.a_err, im.a_err),
            np.hypot(re.b_err, im.b_err),
            re.chi2 + im.chi2,
            re.n_bins,
        )
    return _solve(A, values, None, degree)


@dataclass
class PolynomialFit:
    coef: np.ndarray
    err: np.ndarray
    chi2: float
    n_bins: int

    @classmethod
    def zero(cls, degree: int) -> "PolynomialFit":
        return cls(np.zeros(degree + 1), np.zeros(degree + 1), 0.0, 0)

    def to_dict(self) -> dict:
        return {"coef": self.coef.tolist(), "err": self.err.tolist(), "chi2": self.chi2, "n_bins": self.n_bins}


def fit_polynomial_profile(lo: np.ndarray, hi: np.ndarray, values: np.ndarray, errors: np.ndarray,
                           degree: int = 2) -> PolynomialFit:
    """Σ c_j t^j 的加權擬合，基底取箱內平均"""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    values, errors = np.asarray(values, float), np.asarray(errors, float)
    if not np.any(values):
        return PolynomialFit.zero(degree)
    positive = errors[errors > 0]
    floor = float(np.min(positive)) if positive.size else 1.0
    sigma = np.where(errors > 0, errors, floor)
    A = np.stack([_bin_average(lambda t, j=j: t**j, lo, hi) for j in range(degree + 1)], axis=1)
    coef, err, chi2 = _weighted_lstsq(A, values, sigma)
    return PolynomialFit(coef, err, chi2, len(values))


def probes(t_min: float | None = None, t_max: float | None = None, n: int | None = None,
           side: Literal["left", "right"] = "right") -> np.ndarray:
    t_min = settings.fit_t_min if t_min is None else t_min
    t_max = settings.fit_t_max if t_max is None else t_max
    n = settings.fit_probes if n is None else n
    pts = np.geomspace(t_min, t_max, n)
    return pts if side == "right" else -pts


def window_mask(lo: np.ndarray, hi: np.ndarray, side: str, t_min: float, t_max: float) -> np.ndarray:
    if side == "both":
        return window_mask(lo, hi, "right", t_min, t_max) | window_mask(lo, hi, "left", t_min, t_max)
    if side == "right":
        return (lo >= t_min * (1 - 1e-12)) & (hi <= t_max * (1 + 1e-12))
    return (hi <= -t_min * (1 - 1e-12)) & (lo >= -t_max * (1 + 1e-12))


def singular_fit(
    grid: DensityGrid,
    sig: Signature,
    side: Side,
    t_min: float | None = None,
    t_max: float | None = None,
    degree: int = 0,
    eta_fn: EtaFn | None = None,
) -> ExpansionFit:
    """回傳 φ₀、φ₁ 在 0 的極限；以兩個視窗尺度的差估計系統誤差"""
    if grid.ndim != 1:
        raise ValueError("singular_fit 需要一維網格")
    t_min = settings.fit_t_min if t_min is None else t_min
    t_max = settings.fit_t_max if t_max is None else t_max
    eta_fn = eta_fn or (lambda t: eta_array(sig, t))
    edges = grid.edges[0]
    lo, hi = edges[:-1], edges[1:]
    dens, err = grid.density, grid.stderr

    fits = []
    for scale in (1.0, 0.5):
        mask = window_mask(lo, hi, side, t_min, t_max * scale)
        fits.append(fit_binned_profile(lo[mask], hi[mask], dens[mask], err[mask], eta_fn, degree))
    main, half = fits
    main.systematic_a = abs(main.phi0_limit - half.phi0_limit)
    main.systematic_b = abs(main.phi1_limit - half.phi1_limit)
    main.window = (t_min, t_max)
    main.extra["half_window"] = half.to_dict()
    logger.debug(f"singular_fit {sig} {side}: a={main.phi0_limit:.5f}, b={main.phi1_limit:.5f}")
    return main


def fit_edges(t_min: float, t_max: float, n_per_side: int, reach: float) -> np.ndarray:
    """視窗內對數分箱，視窗外以幾何分箱延伸到 ±reach"""
    inner = np.geomspace(t_min, t_max, n_per_side + 1)
    outer = np.geomspace(t_max, max(reach, t_max * 1.01), 12)[1:]
    pos = np.concatenate([inner, outer])
    return np.concatenate([-pos[::-1], pos])


def image_reach(sig: Signature, f: SampleableFunction) -> float:
    """|Q| 在支撐盒上的上界"""
    mx = np.max(np.abs(f.box), axis=1) ** 2
    return float(max(np.sum(mx[: sig.p]), np.sum(mx[sig.p :])))


def default_side(sig: Signature) -> Side:
    """p、q 皆偶時 η 在單側是多項式，必須兩側一起擬合"""
    odd_p, odd_q = sig.parity
    if not odd_p and not odd_q:
        return "both"
    return "left" if (not odd_p and odd_q) else "right"


@dataclass
class CoefficientCheck:
    predicted: float
    measured: float
    measured_error: float
    k: int
    side: str
    fit: ExpansionFit

    @property
    def deviation(self) -> float:
        return abs(self.predicted - self.measured)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "side": self.side,
            "predicted": self.predicted,
            "measured": self.measured,
            "measured_error": self.measured_error,
            "fit": self.fit.to_dict(),
        }


def coefficient_check(
    f: SampleableFunction,
    sig: Signature,
    k: int,
    n_samples: int,
    seed: int,
    side: Side | None = None,
    t_min: float | None = None,
    t_max: float | None = None,
    n_per_side: int | None = None,
    n_threads: int | None = None,
    degree: int | None = None,
) -> CoefficientCheck:
    """比較 (∂Q)^k f(0) 的係數公式與擬合所得 φ₁ 的 k 階導數"""
    if k not in f.dq_powers:
        raise ValueError(f"函數未提供 (∂Q)^{k} f(0)")
    t_min = settings.fit_t_min if t_min is None else t_min
    t_max = settings.fit_t_max if t_max is None else t_max
    n_per_side = settings.fit_probes if n_per_side is None else n_per_side
    side = side or default_side(sig)
    predicted = predicted_coefficient(sig, k, f.dq_powers[k])
    edges = fit_edges(t_min, t_max, n_per_side, image_reach(sig, f))
    grid = mean_density(sig, f, edges, n_samples, seed, n_threads=n_threads)
    fit = singular_fit(grid, sig, side, t_min, t_max, degree=max(k, degree or k))
    measured = math.factorial(k) * float(fit.b[k])
    measured_err = math.factorial(k) * float(np.hypot(fit.b_err[k], fit.systematic_b if k == 0 else 0.0))
    logger.info(f"係數檢查 {sig} k={k}: 預測 {predicted:.5f}，量測 {measured:.5f} ± {measured_err:.5f}")
    return CoefficientCheck(predicted, measured, measured_err, k, side, fit)

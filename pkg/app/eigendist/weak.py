"""
弱特徵方程與局部可積性
∫F·[∂(P)f − χ(P)f] dX、⟨F, f⟩、Gram 矩陣與收縮管狀鄰域上的質量
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import norm, qmc

from app.algebra.block import MEASURE_SCALE, BlockVector
from app.algebra.classify import open_set_flags_batch
from app.algebra.invariants import qs_batch
from app.config import settings
from app.eigendist.basis import BasisFunction, BasisKind, evaluate_batch
from app.eigendist.jets import OPERATORS, Jet, TestFunctionJet, monomials
from app.errors import SupportViolation
from app.meanfn.sampling import parallel_map, split_jobs, stream

logger = logging.getLogger(__name__)

SingularSet = Literal["S", "S0", "ball"]


def _blocks(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return x[:, :4].reshape(-1, 2, 2), x[:, 4:].reshape(-1, 2, 2)


def _enc(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def partial_P(P: str, f: TestFunctionJet, X: BlockVector) -> float:
    """∂(P)f(X)，由 4 階 jet 精確計算；支撐外為 0"""
    if P not in OPERATORS:
        raise ValueError(f"未知的不變多項式: {P}")
    if float(f.s_values(X.to_vector()[None, :])[0]) >= 1.0:
        return 0.0
    return float(np.real(OPERATORS[P].apply(f.jet(X, 4))))


def partial_P_batch(P: str, f: TestFunctionJet, x: np.ndarray) -> np.ndarray:
    """未拉回的 bump 用閉式，否則逐點 jet"""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.array_equal(f.transform, np.eye(8)):
        return f.partial_P_batch(P, x)
    return np.array([partial_P(P, f, BlockVector.from_vector(row)) for row in x])


# ---------------------------------------------------------------------------
# 支撐認證
# ---------------------------------------------------------------------------

@dataclass
class SupportCertificate:
    names: tuple[str, ...]
    n_points: int
    covering_radius: float
    radius_bound: float
    sample_ok: dict[str, bool]
    certified: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.sample_ok.values())

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "n_points": self.n_points,
            "covering_radius": self.covering_radius,
            "radius_bound": self.radius_bound,
            "sample_ok": self.sample_ok,
            "certified": self.certified,
        }


def _sobol_ball(n: int, seed: int) -> np.ndarray:
    """單位球內的 Sobol 點（方向以常態分位數映射）加上一成的邊界點"""
    m = max(int(math.ceil(math.log2(max(n, 2)))), 1)
    u = qmc.Sobol(d=9, scramble=True, seed=stream(seed, 0, 98)).random_base2(m)[:n]
    u = np.clip(u, 1e-12, 1.0 - 1e-12)
    d = norm.ppf(u[:, :8])
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    inner = d * u[:, 8:9] ** (1.0 / 8.0)
    return np.concatenate([inner, d[: max(n // 10, 1)]])


def _lipschitz(R: float) -> dict[str, float]:
    """半徑 R 的球上 |∇Q| ≤ R、|∇S| ≤ R³、|∇S0| ≤ 5R³"""
    return {"Q": R, "S": R**3, "S0": 5.0 * R**3}


def _margins(Q: np.ndarray, S: np.ndarray, L: dict[str, float], d: float) -> dict[str, np.ndarray]:
    S0 = Q * Q - 4.0 * S
    q_pos, q_neg = Q > L["Q"] * d, Q < -L["Q"] * d
    s_pos = S > L["S"] * d
    s0_pos, s0_neg = S0 > L["S0"] * d, S0 < -L["S0"] * d
    return {
        "in_U": (np.abs(Q) > L["Q"] * d) | (np.abs(S0) > L["S0"] * d),
        "in_U_m": s0_pos,
        "in_U3": s_pos & (q_pos | s0_neg),
        "in_varpi_U3": s_pos & (q_neg | s0_neg),
    }


_BATCH_KEYS = {"in_U": "U", "in_U_m": "U_m", "in_U3": "U3", "in_varpi_U3": "varpi_U3"}


def certify_support(f: TestFunctionJet, *names: str, n_samples: int | None = None, seed: int = 0,
                    tol: float | None = None) -> SupportCertificate:
    """閉支撐落在指定開集內：抽樣失敗時拋出 SupportViolation，只有抽樣成立時記警告"""
    names = names or ("in_U",)
    unknown = [n for n in names if n not in _BATCH_KEYS]
    if unknown:
        raise ValueError(f"未知的開集旗標：{unknown}")
    n_samples = settings.support_samples if n_samples is None else n_samples
    tol = settings.tol_regular if tol is None else tol

    local = _sobol_ball(n_samples, seed)
    x = f._from_local(local)
    Q, S = qs_batch(*_blocks(x))
    flags = open_set_flags_batch(Q, S, tol)
    sample_ok = {n: bool(np.all(flags[_BATCH_KEYS[n]])) for n in names}

    # 以隨機探測點估計樣本的覆蓋半徑
    probe = f.sample(stream(seed, 0, 97), min(2048, n_samples))
    d = float(np.max(cKDTree(x).query(probe)[0]))
    m_inv = np.linalg.inv(f.transform)
    R = float(np.linalg.norm(m_inv @ f.center) + f.radius * np.linalg.norm(m_inv, 2))
    margins = _margins(Q, S, _lipschitz(R), d)
    certified = {n: sample_ok[n] and bool(np.all(margins[n])) for n in names}

    cert = SupportCertificate(tuple(names), len(x), d, R, sample_ok, certified)
    failed = [n for n, ok in sample_ok.items() if not ok]
    if failed:
        raise SupportViolation(f"{f.name or 'f'} 的支撐不在 {', '.join(failed)} 內")
    weak = [n for n, ok in certified.items() if not ok]
    if weak:
        logger.warning(f"{f.name or 'f'} 的支撐只有抽樣確認 {', '.join(weak)}（覆蓋半徑 {d:.3g}）")
    return cert


# ---------------------------------------------------------------------------
# 批次平均
# ---------------------------------------------------------------------------

Integrand = Callable[[np.ndarray], np.ndarray]


def _batch_means(f: TestFunctionJet, integrand: Integrand, n_samples: int, seed: int, key: int,
                 n_batches: int | None = None, n_threads: int | None = None) -> np.ndarray:
    """回傳 (n_batches, …) 的批次平均，已乘上 vol·dX 權重"""
    n_batches = settings.n_batches if n_batches is None else n_batches
    if n_samples < 2 * n_batches:
        raise ValueError(f"樣本數 {n_samples} 少於批次數 {n_batches} 的兩倍")
    base, rest = divmod(n_samples, n_batches)
    sizes = [base + (1 if j < rest else 0) for j in range(n_batches)]
    weight = f.volume * MEASURE_SCALE

    def job(args: tuple[int, int]) -> np.ndarray:
        j, size = args
        rng = stream(seed, j, key)
        total = None
        for chunk in split_jobs(size):
            y = np.asarray(integrand(f.sample(rng, chunk)))
            part = np.sum(y, axis=0)
            total = part if total is None else total + part
        return weight * total / size

    logger.info(f"蒙地卡羅：{n_samples} 個樣本，{n_batches} 個批次")
    return np.stack(parallel_map(job, list(enumerate(sizes)), n_threads))


def _mean_sigma(means: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = means.shape[0]
    return means.mean(axis=0), np.std(means, axis=0, ddof=1) / math.sqrt(n)


# ---------------------------------------------------------------------------
# 多項式控制變量
# ---------------------------------------------------------------------------

CONTROL_DEGREE = 3
CONTROL_SAMPLES = 4096


@dataclass
class PolynomialControl:
    """支撐中心附近擬合 F 的多項式 T；∫T·∂(P)f = ∫f·∂(P)T（分部積分，f 緊支撐）"""
    center: np.ndarray
    poly: Jet
    residual: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.poly.evaluate_offsets(np.atleast_2d(x) - self.center)

    def partial(self, P: str, x: np.ndarray) -> np.ndarray:
        out = OPERATORS[P].apply_polynomial(self.poly)
        if out is None:
            return np.zeros(len(np.atleast_2d(x)), dtype=complex)
        return out.evaluate_offsets(np.atleast_2d(x) - self.center)


def fit_control(bf: BasisFunction, f: TestFunctionJet, seed: int, degree: int = CONTROL_DEGREE,
                n_fit: int = CONTROL_SAMPLES) -> PolynomialControl:
    """以獨立串流的試樣做最小平方擬合；T 與估計用的樣本無關，估計保持無偏"""
    center = f._from_local(np.zeros((1, 8)))[0]
    x = f.sample(stream(seed, 0, 6), n_fit)
    F = evaluate_batch(bf, x)
    ok = np.isfinite(F)
    scale = f.radius
    design = monomials((x[ok] - center) / scale, degree)
    coef, *_ = np.linalg.lstsq(design, F[ok], rcond=None)
    degrees = Jet.constant(0.0, 8, degree).layout.degrees
    poly = Jet(coef / scale**degrees, 8, degree)
    resid = F[ok] - design @ coef
    rel = float(np.sqrt(np.mean(np.abs(resid) ** 2) / max(np.mean(np.abs(F[ok]) ** 2), 1e-300)))
    logger.debug(f"{bf.name} 的 {degree} 次控制多項式：相對殘差 {rel:.3e}")
    return PolynomialControl(center, poly, rel)


@dataclass
class WeakEigenResult:
    function: str
    P: str
    chi: complex
    chi_shift: complex
    estimate: complex
    sigma: float
    inner: complex
    abs_mass: float
    n_samples: int
    sigma_level: float
    support: SupportCertificate | None = None

    @property
    def passed(self) -> bool:
        return abs(self.estimate) <= self.sigma_level * self.sigma

    def to_dict(self) -> dict:
        out = {
            "function": self.function,
            "P": self.P,
            "chi": _enc(self.chi),
            "chi_shift": _enc(self.chi_shift),
            "estimate": _enc(self.estimate),
            "sigma": self.sigma,
            "inner": _enc(self.inner),
            "abs_mass": self.abs_mass,
            "n_samples": self.n_samples,
            "passed": self.passed,
        }
        if self.support is not None:
            out["support"] = self.support.to_dict()
        return out


def weak_eigen(bf: BasisFunction, f: TestFunctionJet, P: str, n_samples: int, seed: int,
               chi_shift: complex = 0.0, require: Sequence[str] = ("in_U",), check_support: bool = True,
               n_threads: int | None = None, sigma_level: float | None = None,
               control: bool = True) -> WeakEigenResult:
    """∫F(X)·[∂(P)f(X) − χ(P)f(X)] dX 的蒙地卡羅估計；F_ana 在整個 q 上成立，不檢查支撐

    control=True 時被積函數改寫為 (F − T)·∂(P)f + f·∂(P)T − χF·f，期望值不變
    """
    sigma_level = settings.sigma_level if sigma_level is None else sigma_level
    if P not in OPERATORS:
        raise ValueError(f"未知的不變多項式: {P}")
    chi = bf.chi(P) + complex(chi_shift)
    support = None
    if check_support and bf.which is not BasisKind.ANA:
        support = certify_support(f, *require, seed=seed)
    cv = fit_control(bf, f, seed) if control else None

    def integrand(x: np.ndarray) -> np.ndarray:
        F = evaluate_batch(bf, x)
        fx = f(x)
        dpf = partial_P_batch(P, f, x)
        if cv is None:
            defect = F * dpf - chi * F * fx
        else:
            defect = (F - cv(x)) * dpf + fx * cv.partial(P, x) - chi * F * fx
        return np.stack([defect, F * fx, np.abs(F) * fx + 0j], axis=1)

    means = _batch_means(f, integrand, n_samples, seed, 2, n_threads=n_threads)
    mean, sigma = _mean_sigma(means)
    result = WeakEigenResult(
        bf.name, P, chi, complex(chi_shift), complex(mean[0]), float(sigma[0]), complex(mean[1]),
        float(mean[2].real), n_samples, sigma_level, support,
    )
    logger.info(f"weak_eigen {bf.name} ∂({P}): {abs(result.estimate):.3e} ± {result.sigma:.3e}")
    return result


def inner_product(bf: BasisFunction, f: TestFunctionJet, n_samples: int, seed: int,
                  absolute: bool = False, n_threads: int | None = None) -> tuple[complex, float]:
    """⟨F, f⟩ 或 ⟨|F|, f⟩，回傳 (估計, σ)"""
    def integrand(x: np.ndarray) -> np.ndarray:
        F = evaluate_batch(bf, x)
        return (np.abs(F) if absolute else F) * f(x)

    mean, sigma = _mean_sigma(_batch_means(f, integrand, n_samples, seed, 3, n_threads=n_threads))
    return complex(mean), float(sigma)


# ---------------------------------------------------------------------------
# 局部可積性
# ---------------------------------------------------------------------------

def _tube_coordinate(singular_set: SingularSet) -> Callable[[np.ndarray], np.ndarray]:
    if singular_set == "S":
        return lambda x: np.abs(qs_batch(*_blocks(x))[1])
    if singular_set == "S0":
        def s0(x):
            Q, S = qs_batch(*_blocks(x))
            return np.abs(Q * Q - 4.0 * S)

        return s0
    if singular_set == "ball":
        return lambda x: np.linalg.norm(x, axis=1)
    raise ValueError(f"未知的奇異集：{singular_set}")


@dataclass
class IntegrabilityReport:
    function: str
    singular_set: str
    widths: np.ndarray
    masses: np.ndarray
    sigmas: np.ndarray
    total_mass: float
    total_sigma: float
    extra: dict = field(default_factory=dict)

    @property
    def monotone(self) -> bool:
        """相鄰兩層的增量不超過 2σ"""
        for k in range(len(self.masses) - 1):
            if self.masses[k + 1] > self.masses[k] + 2.0 * math.hypot(self.sigmas[k], self.sigmas[k + 1]):
                return False
        return True

    @property
    def slope(self) -> float:
        """log(mass) 對 log(width) 的斜率；正值表示質量趨於 0"""
        ok = self.masses > 0
        if np.count_nonzero(ok) < 2:
            return math.inf
        return float(np.polyfit(np.log(self.widths[ok]), np.log(self.masses[ok]), 1)[0])

    @property
    def passed(self) -> bool:
        return self.monotone and self.slope > 0 and math.isfinite(self.total_mass)

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "singular_set": self.singular_set,
            "widths": self.widths.tolist(),
            "masses": self.masses.tolist(),
            "sigmas": self.sigmas.tolist(),
            "total_mass": self.total_mass,
            "total_sigma": self.total_sigma,
            "monotone": self.monotone,
            "slope": self.slope,
            "passed": self.passed,
            **self.extra,
        }


def integrability_probe(bf: BasisFunction, singular_set: SingularSet, f: TestFunctionJet, n_samples: int,
                        seed: int, shrink_levels: int = 4, w0: float | None = None,
                        n_threads: int | None = None) -> IntegrabilityReport:
    """寬度 w₀·2^{−k} 的巢狀管狀鄰域上 ∫|F|f dX；w₀ 預設取試樣的中位數"""
    coord = _tube_coordinate(singular_set)
    if w0 is None:
        pilot = f.sample(stream(seed, 0, 7), 4096)
        w0 = float(np.median(coord(pilot)))
    widths = w0 * 0.5 ** np.arange(shrink_levels)

    def integrand(x: np.ndarray) -> np.ndarray:
        g = coord(x)
        mass = np.abs(evaluate_batch(bf, x)) * f(x)
        mass = np.where(np.isfinite(mass), mass, 0.0)
        inside = g[:, None] < widths[None, :]
        return np.concatenate([mass[:, None], mass[:, None] * inside], axis=1)

    mean, sigma = _mean_sigma(_batch_means(f, integrand, n_samples, seed, 4, n_threads=n_threads))
    report = IntegrabilityReport(
        bf.name, singular_set, widths, mean[1:], sigma[1:], float(mean[0]), float(sigma[0]), {"w0": w0},
    )
    logger.info(f"integrability_probe {bf.name} [{singular_set}]: 質量 {np.round(report.masses, 6).tolist()}")
    return report


@dataclass
class GramReport:
    names: list[str]
    matrix: np.ndarray
    singular_values: np.ndarray
    threshold: float = 1e-6

    @property
    def ratio(self) -> float:
        top = float(self.singular_values[0])
        return float(self.singular_values[-1]) / top if top > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.ratio > self.threshold

    def to_dict(self) -> dict:
        return {
            "names": self.names,
            "matrix_re": self.matrix.real.tolist(),
            "matrix_im": self.matrix.imag.tolist(),
            "singular_values": self.singular_values.tolist(),
            "ratio": self.ratio,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def gram_matrix(basis: Sequence[BasisFunction], f: TestFunctionJet, n_samples: int, seed: int,
                threshold: float = 1e-6, n_threads: int | None = None) -> GramReport:
    """G_ij = ∫F_i conj(F_j) f dX，f 取 U_m 內的正 bump"""
    certify_support(f, "in_U_m", seed=seed)
    m = len(basis)

    def integrand(x: np.ndarray) -> np.ndarray:
        F = np.stack([evaluate_batch(bf, x) for bf in basis], axis=1)
        G = F[:, :, None] * np.conj(F[:, None, :]) * f(x)[:, None, None]
        return G.reshape(len(x), m * m)

    mean, _ = _mean_sigma(_batch_means(f, integrand, n_samples, seed, 5, n_threads=n_threads))
    G = mean.reshape(m, m)
    sv = np.linalg.svd(G, compute_uv=False)
    report = GramReport([bf.name for bf in basis], G, sv, threshold)
    logger.info(f"Gram 矩陣 {m}×{m}：最小/最大奇異值 {report.ratio:.3e}")
    return report

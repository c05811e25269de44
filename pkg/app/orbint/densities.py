"""
軌道積分密度
以 Weyl 積分公式把 q 上的抽樣依 S0 的符號分到 (t₁,t₂) 或 (τ,θ) 網格，除以 Jacobian 得 Mf_m、Mf₂
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from app.algebra.block import MEASURE_SCALE
from app.algebra.invariants import invariants_batch
from app.config import settings
from app.meanfn.density import GRID_MISS_LIMIT, DensityGrid
from app.meanfn.sampling import parallel_map, split_jobs, stream
from app.orbint.testfn import QTestFunction

logger = logging.getLogger(__name__)


def _route(x: np.ndarray) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """回傳各網格的 (點, 原索引)"""
    inv = invariants_batch(x[:, :4].reshape(-1, 2, 2), x[:, 4:].reshape(-1, 2, 2))
    S0, u, v = inv["S0"], inv["u"], inv["v"]
    real = S0 > 0
    cplx = S0 < 0
    idx_m = np.flatnonzero(real)
    pts_m = np.stack([u.real[real], v.real[real]], axis=1)

    # Im u > 0，主支平方根落在 τ > 0、θ > 0
    idx_2 = np.flatnonzero(cplx)
    zeta = np.sqrt(u[cplx])
    pts_2 = np.stack([zeta.real, zeta.imag], axis=1)

    pos = real & (u.real > 0) & (v.real > 0)
    idx_r = np.flatnonzero(pos)
    su, sv = np.sqrt(u.real[pos]), np.sqrt(v.real[pos])
    pts_r = np.stack([0.5 * (su + sv), 0.5 * (su - sv)], axis=1)
    return {"m": (pts_m, idx_m), "2": (pts_2, idx_2), "r": (pts_r, idx_r)}


def jacobian_m(t1, t2):
    return np.abs(t1 - t2)


def jacobian_2(tau, theta):
    return 32.0 * tau * theta * (tau**2 + theta**2)


def jacobian_r(tau, theta):
    return 32.0 * tau * theta * (tau**2 - theta**2)


def _divide(grid: DensityGrid, values: np.ndarray, jac: Callable) -> np.ndarray:
    c1, c2 = grid.centers()
    div = jac(c1[:, None], c2[None, :])
    out = np.zeros_like(values)
    np.divide(values, div, out=out, where=div > 0)
    return out


@dataclass
class OrbitalDensities:
    """grid_m、grid_2、grid_r 存原始推前密度；mf_* 為除以 Jacobian 後的值"""

    grid_m: DensityGrid
    grid_2: DensityGrid
    grid_r: DensityGrid
    meta: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.grid_m.n_samples

    @property
    def mf_m(self) -> np.ndarray:
        return _divide(self.grid_m, self.grid_m.density, jacobian_m)

    @property
    def mf_m_err(self) -> np.ndarray:
        return _divide(self.grid_m, self.grid_m.stderr, jacobian_m)

    @property
    def mf_2(self) -> np.ndarray:
        return _divide(self.grid_2, self.grid_2.density, jacobian_2)

    @property
    def mf_2_err(self) -> np.ndarray:
        return _divide(self.grid_2, self.grid_2.stderr, jacobian_2)

    @property
    def mf_r(self) -> np.ndarray:
        return _divide(self.grid_r, self.grid_r.density, jacobian_r)

    @property
    def mf_r_err(self) -> np.ndarray:
        return _divide(self.grid_r, self.grid_r.stderr, jacobian_r)

    def is_zero(self) -> bool:
        return not (np.any(self.grid_m.sum_w) or np.any(self.grid_2.sum_w))

    def _rows(self, grid: DensityGrid, mf: np.ndarray, mf_err: np.ndarray) -> list[dict]:
        rows = grid.rows()
        for row, idx in zip(rows, np.ndindex(*grid.shape)):
            row["mf"] = float(mf[idx])
            row["mf_stderr"] = float(mf_err[idx])
        return rows

    def rows(self, which: str) -> list[dict]:
        if which == "m":
            return self._rows(self.grid_m, self.mf_m, self.mf_m_err)
        if which == "2":
            return self._rows(self.grid_2, self.mf_2, self.mf_2_err)
        if which == "r":
            return self._rows(self.grid_r, self.mf_r, self.mf_r_err)
        raise ValueError(f"未知的網格: {which}")

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "meta": self.meta,
            "grid_m": {**self.grid_m.to_dict(), "mf": self.mf_m.tolist(), "mf_stderr": self.mf_m_err.tolist()},
            "grid_2": {**self.grid_2.to_dict(), "mf": self.mf_2.tolist(), "mf_stderr": self.mf_2_err.tolist()},
        }

    def export(self, directory: str | Path, fmt: str = "csv") -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        if fmt == "json":
            path = directory / "orbital_densities.json"
            path.write_text(json.dumps(self.to_dict(), ensure_ascii=False), encoding="utf-8")
            return [path]
        for which, stem in (("m", "grid_m"), ("2", "grid_2")):
            rows = self.rows(which)
            path = directory / f"{stem}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
                writer.writeheader()
                writer.writerows(rows)
            written.append(path)
        logger.info(f"已輸出 {len(written)} 個網格到 {directory}")
        return written


def split_log_axis(lo: float, hi: float, t_min: float, t_max: float, n_log: int = 10, n_lin: int = 10) -> np.ndarray:
    """0 附近對數分箱（中央一格 [−t_min, t_min]），±t_max 之外均勻延伸到 [lo, hi]"""
    pos = np.geomspace(t_min, t_max, n_log + 1)
    parts = []
    if lo < -t_max:
        parts.append(np.linspace(lo, -t_max, n_lin + 1)[:-1])
    parts += [-pos[::-1], pos]
    if hi > t_max:
        parts.append(np.linspace(t_max, hi, n_lin + 1)[1:])
    return np.concatenate(parts)


def suggest_edges(
    f: QTestFunction,
    n_bins: int = 40,
    seed: int = 0,
    pilot: int = 20_000,
    pad: float = 0.05,
    log_window: tuple[float, float] | None = None,
) -> dict[str, list[np.ndarray]]:
    """以試抽樣估計 (t₁,t₂) 與 (τ,θ) 的範圍；log_window 給定時 t₂ 軸在 0 附近改用對數分箱"""
    x = f.sample(stream(seed, 0, 98), pilot)
    routed = _route(x)

    def axis(values: np.ndarray, floor_zero: bool) -> np.ndarray:
        if values.size == 0:
            return np.linspace(0.0, 1.0, n_bins + 1)
        lo, hi = float(values.min()), float(values.max())
        span = max(hi - lo, 1e-6)
        lo, hi = lo - pad * span, hi + pad * span
        if floor_zero:
            lo = max(lo, 0.0)
        return np.linspace(lo, hi, n_bins + 1)

    pts_m = routed["m"][0]
    pts_2 = routed["2"][0]
    pts_r = routed["r"][0]
    edges_m = [axis(pts_m[:, 0], False), axis(pts_m[:, 1], False)]
    if log_window is not None:
        t_min, t_max = log_window
        t2 = edges_m[1]
        edges_m[1] = split_log_axis(min(t2[0], -1.5 * t_max), max(t2[-1], 1.5 * t_max), t_min, t_max)
    tau = np.concatenate([pts_2[:, 0], pts_r[:, 0]])
    edges_2 = [axis(tau, True), axis(np.concatenate([pts_2[:, 1], pts_r[:, 1]]), True)]
    return {"m": edges_m, "2": edges_2, "r": [e.copy() for e in edges_2]}


def orbital_densities(
    f: QTestFunction,
    edges_m: Sequence[np.ndarray],
    edges_2: Sequence[np.ndarray],
    n_samples: int,
    seed: int,
    edges_r: Sequence[np.ndarray] | None = None,
    n_threads: int | None = None,
    batch_size: int | None = None,
    miss_limit: float = GRID_MISS_LIMIT,
    check_support: bool = True,
) -> OrbitalDensities:
    """X 在 f 的支撐內均勻抽樣，權重 f(X)·vol/16；S0 > 0 落在 (u,v)，S0 < 0 落在 (τ,θ) = √u"""
    edges_r = edges_2 if edges_r is None else edges_r
    if check_support and not f.is_zero:
        f.require("in_U", n_samples=min(settings.support_samples, 20_000), seed=seed)
    sizes = split_jobs(n_samples, batch_size)
    vol = f.volume * MEASURE_SCALE

    def job(args: tuple[int, int]) -> tuple[DensityGrid, DensityGrid, DensityGrid]:
        j, size = args
        rng = stream(seed, j)
        x = f.sample(rng, size)
        w = vol * f(x)
        keep = w != 0
        x, w = x[keep], w[keep]
        routed = _route(x)
        out = []
        for key, edges in (("m", edges_m), ("2", edges_2), ("r", edges_r)):
            pts, idx = routed[key]
            grid = DensityGrid.empty(edges)
            grid.accumulate(pts, w[idx], size)
            out.append(grid)
        return tuple(out)

    logger.info(f"軌道密度抽樣：{n_samples} 點，{len(sizes)} 個工作")
    parts = parallel_map(job, list(enumerate(sizes)), n_threads)
    grid_m, grid_2, grid_r = DensityGrid.empty(edges_m), DensityGrid.empty(edges_2), DensityGrid.empty(edges_r)
    for gm, g2, gr in parts:
        grid_m, grid_2, grid_r = grid_m.merge(gm), grid_2.merge(g2), grid_r.merge(gr)
    grid_m.check_miss(miss_limit)
    grid_2.check_miss(miss_limit)
    meta = {"seed": seed, "test_function": f.to_dict()}
    return OrbitalDensities(grid_m, grid_2, grid_r, meta)


# H 不變函數 Φ(Q, S)；a₂ 上 Q = 2(τ²−θ²)、S = (τ²+θ²)²
INVARIANT_FUNCTIONS: dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "1": lambda Q, S: np.ones_like(Q),
    "Q": lambda Q, S: Q,
    "S": lambda Q, S: S,
    "Q2": lambda Q, S: Q * Q,
}


@dataclass
class WeylEntry:
    phi: str
    lhs: float
    lhs_err: float
    rhs: float
    rhs_err: float
    sigma_level: float

    @property
    def sigma(self) -> float:
        return float(np.hypot(self.lhs_err, self.rhs_err))

    @property
    def deviation(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def passed(self) -> bool:
        return self.deviation <= self.sigma_level * self.sigma

    def to_dict(self) -> dict:
        return {
            "phi": self.phi,
            "lhs": self.lhs,
            "lhs_err": self.lhs_err,
            "rhs": self.rhs,
            "rhs_err": self.rhs_err,
            "sigma": self.sigma,
            "deviation": self.deviation,
            "passed": self.passed,
        }


def _grid_moments(grid: DensityGrid, mf: np.ndarray, integrand: np.ndarray) -> tuple[float, float]:
    """Σ_b integrand_b·Mf_b·Δ_b 換算成每單位原始權重的貢獻 c_b，回傳 Σ c_b·sum_w_b 與 Σ c_b²·sum_w2_b"""
    mass = integrand * mf * grid.bin_volumes() * grid.n_samples
    c = np.zeros_like(mass)
    np.divide(mass, grid.sum_w, out=c, where=grid.sum_w != 0)
    return float(np.sum(c * grid.sum_w)), float(np.sum(c**2 * grid.sum_w2))


def weyl_rhs(dens: OrbitalDensities, phi: str) -> tuple[float, float]:
    """∫(|δ|Φ)_m Mf_m + 8∫4τθ(τ²+θ²)Φ₂ Mf₂，權重與 Φ 取在箱中心，Mf 為除過 Jacobian 的密度"""
    fn = INVARIANT_FUNCTIONS[phi]
    n = dens.n_samples
    if n < 2:
        return 0.0, 0.0
    t1, t2 = dens.grid_m.centers()
    T1, T2 = np.meshgrid(t1, t2, indexing="ij")
    integrand_m = np.abs(T1 - T2) * fn(T1 + T2, T1 * T2)
    tau, theta = dens.grid_2.centers()
    TA, TH = np.meshgrid(tau, theta, indexing="ij")
    integrand_2 = 8.0 * 4.0 * TA * TH * (TA**2 + TH**2) * fn(2.0 * (TA**2 - TH**2), (TA**2 + TH**2) ** 2)
    s1_m, s2_m = _grid_moments(dens.grid_m, dens.mf_m, integrand_m)
    s1_2, s2_2 = _grid_moments(dens.grid_2, dens.mf_2, integrand_2)
    mean = (s1_m + s1_2) / n
    var = max((s2_m + s2_2) / n - mean * mean, 0.0) / (n - 1)
    return mean, float(np.sqrt(var))


def direct_integral(
    f: QTestFunction,
    phi: str,
    n_samples: int,
    seed: int,
    n_threads: int | None = None,
    batch_size: int | None = None,
) -> tuple[float, float]:
    """∫Φ f dX 的直接蒙地卡羅，使用與密度不同的亂數流"""
    fn = INVARIANT_FUNCTIONS[phi]
    sizes = split_jobs(n_samples, batch_size)
    vol = f.volume * MEASURE_SCALE

    def job(args: tuple[int, int]) -> tuple[float, float]:
        j, size = args
        x = f.sample(stream(seed, j, 1), size)
        inv = invariants_batch(x[:, :4].reshape(-1, 2, 2), x[:, 4:].reshape(-1, 2, 2))
        y = vol * f(x) * fn(inv["Q"], inv["S"])
        return float(np.sum(y)), float(np.sum(y * y))

    parts = parallel_map(job, list(enumerate(sizes)), n_threads)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    if n_samples < 2:
        return 0.0, 0.0
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0) / (n_samples - 1)
    return mean, float(np.sqrt(var))


def weyl_check(
    f: QTestFunction,
    dens: OrbitalDensities,
    phis: Sequence[str] = ("1", "Q", "S", "Q2"),
    n_samples: int | None = None,
    seed: int = 0,
    sigma_level: float | None = None,
    n_threads: int | None = None,
) -> list[WeylEntry]:
    """比較直接積分與由密度重建的積分"""
    n_samples = dens.n_samples if n_samples is None else n_samples
    sigma_level = settings.sigma_level if sigma_level is None else sigma_level
    out = []
    for phi in phis:
        if phi not in INVARIANT_FUNCTIONS:
            raise ValueError(f"未知的不變函數: {phi}")
        lhs, lhs_err = direct_integral(f, phi, n_samples, seed, n_threads)
        rhs, rhs_err = weyl_rhs(dens, phi)
        entry = WeylEntry(phi, lhs, lhs_err, rhs, rhs_err, sigma_level)
        logger.info(f"Weyl 檢查 Φ={phi}: 左 {lhs:.6g} ± {lhs_err:.2g}，右 {rhs:.6g} ± {rhs_err:.2g}")
        out.append(entry)
    return out


def weyl_report(entries: Sequence[WeylEntry]) -> dict:
    return {"weyl_report": [e.to_dict() for e in entries], "passed": all(e.passed for e in entries)}

"""
推前密度
以蒙地卡羅抽樣與分箱估計 M_Q f 與 M_{Q1,Q2} f
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np

from app.config import settings
from app.errors import GridMiss
from app.meanfn.sampling import SampleableFunction, parallel_map, split_jobs, stream
from app.meanfn.signature import Signature

logger = logging.getLogger(__name__)

GRID_MISS_LIMIT = 1e-3


def uniform_edges(lo: float, hi: float, n_bins: int) -> np.ndarray:
    return np.linspace(lo, hi, n_bins + 1)


def symmetric_log_edges(t_min: float, t_max: float, n_per_side: int) -> np.ndarray:
    """±[t_min, t_max] 對數間隔，中央一格 [−t_min, t_min]"""
    pos = np.geomspace(t_min, t_max, n_per_side + 1)
    return np.concatenate([-pos[::-1], pos])


def one_sided_log_edges(t_min: float, t_max: float, n_bins: int, side: Literal["left", "right"] = "right") -> np.ndarray:
    pos = np.geomspace(t_min, t_max, n_bins + 1)
    return np.concatenate([[0.0], pos]) if side == "right" else np.concatenate([-pos[::-1], [0.0]])


@dataclass
class DensityGrid:
    """一維或二維分箱密度；累加量可結合地合併"""

    edges: list[np.ndarray]
    sum_w: np.ndarray
    sum_w2: np.ndarray
    count: np.ndarray
    n_samples: int = 0
    total_w: float = 0.0
    total_w2: float = 0.0
    total_abs_w: float = 0.0
    outside_abs_w: float = 0.0
    meta: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, edges: Sequence[np.ndarray], **meta) -> "DensityGrid":
        edges = [np.asarray(e, dtype=float) for e in edges]
        shape = tuple(len(e) - 1 for e in edges)
        return cls(edges, np.zeros(shape), np.zeros(shape), np.zeros(shape, dtype=np.int64), meta=dict(meta))

    @property
    def ndim(self) -> int:
        return len(self.edges)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.sum_w.shape

    def centers(self) -> list[np.ndarray]:
        return [0.5 * (e[1:] + e[:-1]) for e in self.edges]

    def widths(self) -> list[np.ndarray]:
        return [np.diff(e) for e in self.edges]

    def bin_volumes(self) -> np.ndarray:
        w = self.widths()
        if self.ndim == 1:
            return w[0]
        return np.outer(w[0], w[1])

    def accumulate(self, points: np.ndarray, weights: np.ndarray, n_drawn: int) -> None:
        """points 形狀 (N, d)；n_drawn 為此批抽樣總數（含權重為 0 者）"""
        points = np.asarray(points, dtype=float).reshape(len(weights), self.ndim)
        weights = np.asarray(weights, dtype=float)
        s1, _ = np.histogramdd(points, bins=self.edges, weights=weights)
        s2, _ = np.histogramdd(points, bins=self.edges, weights=weights * weights)
        cnt, _ = np.histogramdd(points, bins=self.edges)
        self.sum_w += s1
        self.sum_w2 += s2
        self.count += cnt.astype(np.int64)
        self.n_samples += int(n_drawn)
        self.total_w += float(np.sum(weights))
        self.total_w2 += float(np.sum(weights * weights))
        self.total_abs_w += float(np.sum(np.abs(weights)))
        self.outside_abs_w += float(np.sum(np.abs(weights[~self._inside(points)])))

    def _inside(self, points: np.ndarray) -> np.ndarray:
        mask = np.ones(len(points), dtype=bool)
        for d, e in enumerate(self.edges):
            mask &= (points[:, d] >= e[0]) & (points[:, d] <= e[-1])
        return mask

    def merge(self, other: "DensityGrid") -> "DensityGrid":
        if len(self.edges) != len(other.edges) or not all(
            np.array_equal(a, b) for a, b in zip(self.edges, other.edges)
        ):
            raise ValueError("只能合併相同分箱的網格")
        return DensityGrid(
            self.edges,
            self.sum_w + other.sum_w,
            self.sum_w2 + other.sum_w2,
            self.count + other.count,
            self.n_samples + other.n_samples,
            self.total_w + other.total_w,
            self.total_w2 + other.total_w2,
            self.total_abs_w + other.total_abs_w,
            self.outside_abs_w + other.outside_abs_w,
            dict(self.meta),
        )

    @property
    def density(self) -> np.ndarray:
        if self.n_samples == 0:
            return np.zeros(self.shape)
        return self.sum_w / (self.n_samples * self.bin_volumes())

    @property
    def stderr(self) -> np.ndarray:
        n = self.n_samples
        if n < 2:
            return np.zeros(self.shape)
        mean = self.sum_w / n
        var = np.clip(self.sum_w2 / n - mean * mean, 0.0, None) / (n - 1)
        return np.sqrt(var) / self.bin_volumes()

    def mass(self) -> float:
        """Σ density·Δ"""
        return float(np.sum(self.density * self.bin_volumes()))

    def integral(self) -> tuple[float, float]:
        """全部抽樣的 ∫f 估計與標準誤差"""
        n = self.n_samples
        if n < 2:
            return 0.0, 0.0
        mean = self.total_w / n
        var = max(self.total_w2 / n - mean * mean, 0.0) / (n - 1)
        return mean, float(np.sqrt(var))

    def miss_fraction(self) -> float:
        if self.total_abs_w == 0:
            return 0.0
        return self.outside_abs_w / self.total_abs_w

    def check_miss(self, limit: float = GRID_MISS_LIMIT) -> "DensityGrid":
        frac = self.miss_fraction()
        if frac > limit:
            raise GridMiss(f"{frac:.3%} 的權重落在網格外（上限 {limit:.1%}）")
        if frac > 0.5 * limit:
            logger.warning(f"網格外權重比例 {frac:.3%} 接近上限")
        return self

    def scale(self, c: float) -> "DensityGrid":
        return DensityGrid(
            self.edges,
            c * self.sum_w,
            c * c * self.sum_w2,
            self.count.copy(),
            self.n_samples,
            c * self.total_w,
            c * c * self.total_w2,
            abs(c) * self.total_abs_w,
            abs(c) * self.outside_abs_w,
            dict(self.meta),
        )

    def rows(self) -> list[dict]:
        dens, err, cnt = self.density, self.stderr, self.count
        centers = self.centers()
        out = []
        for idx in np.ndindex(*self.shape):
            row = {}
            if self.ndim == 1:
                row["bin_center"] = float(centers[0][idx[0]])
            else:
                for d, i in enumerate(idx):
                    row[f"bin_center_{d + 1}"] = float(centers[d][i])
            row["density"] = float(dens[idx])
            row["stderr"] = float(err[idx])
            row["count"] = int(cnt[idx])
            out.append(row)
        return out

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        rows = self.rows()
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        return path

    def to_dict(self) -> dict:
        return {
            "edges": [e.tolist() for e in self.edges],
            "density": self.density.tolist(),
            "stderr": self.stderr.tolist(),
            "count": self.count.tolist(),
            "n_samples": self.n_samples,
            "miss_fraction": self.miss_fraction(),
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


def pushforward(
    f: SampleableFunction,
    edges: Sequence[np.ndarray],
    project: Callable[[np.ndarray], np.ndarray],
    n_samples: int,
    seed: int,
    n_threads: int | None = None,
    batch_size: int | None = None,
    miss_limit: float = GRID_MISS_LIMIT,
) -> DensityGrid:
    """以 project 把 f 的抽樣點映到網格座標後分箱；權重 f(y)·體積"""
    f.check_box()
    sizes = split_jobs(n_samples, batch_size)
    vol = f.volume

    def job(args: tuple[int, int]) -> DensityGrid:
        j, size = args
        rng = stream(seed, j)
        y = f.sample(rng, size)
        w = vol * f(y)
        grid = DensityGrid.empty(edges)
        grid.accumulate(project(y), w, size)
        return grid

    logger.info(f"推前抽樣：{n_samples} 點，{len(sizes)} 個工作")
    parts = parallel_map(job, list(enumerate(sizes)), n_threads)
    grid = DensityGrid.empty(edges)
    for part in parts:
        grid = grid.merge(part)
    return grid.check_miss(miss_limit)


def mean_density(
    sig: Signature,
    f: SampleableFunction,
    edges: np.ndarray,
    n_samples: int,
    seed: int,
    n_threads: int | None = None,
    batch_size: int | None = None,
    miss_limit: float = GRID_MISS_LIMIT,
) -> DensityGrid:
    """M_Q f 的分箱估計：y 在支撐盒內均勻抽樣，權重 f(y)·體積/n，依 Q(y) 分箱"""
    if f.dim != sig.n:
        raise ValueError(f"函數維度 {f.dim} 與簽名 {sig} 不符")
    grid = pushforward(f, [edges], lambda y: sig.form(y)[:, None], n_samples, seed, n_threads, batch_size, miss_limit)
    grid.meta.update({"signature": [sig.p, sig.q], "seed": seed})
    return grid


def mean_density_2(
    sig1: Signature,
    sig2: Signature,
    f: SampleableFunction,
    edges2: Sequence[np.ndarray],
    n_samples: int,
    seed: int,
    n_threads: int | None = None,
    batch_size: int | None = None,
    miss_limit: float = GRID_MISS_LIMIT,
) -> DensityGrid:
    """M_{Q1,Q2} f：依 (Q₁(x), Q₂(y)) 分箱"""
    n1 = sig1.n
    if f.dim != n1 + sig2.n:
        raise ValueError(f"函數維度 {f.dim} 與簽名 {sig1}×{sig2} 不符")

    def project(y: np.ndarray) -> np.ndarray:
        return np.stack([sig1.form(y[:, :n1]), sig2.form(y[:, n1:])], axis=1)

    grid = pushforward(f, list(edges2), project, n_samples, seed, n_threads, batch_size, miss_limit)
    grid.meta.update({"signatures": [[sig1.p, sig1.q], [sig2.p, sig2.q]], "seed": seed})
    return grid


def iterated_mean_density(
    sig1: Signature,
    sig2: Signature,
    f: SampleableFunction,
    edges2: Sequence[np.ndarray],
    n_outer: int,
    n_inner: int,
    seed: int,
    inner: Literal["first", "second"] = "second",
    chunk: int = 64,
    n_threads: int | None = None,
) -> DensityGrid:
    """先對一組變數推前，再對另一組推前的巢狀蒙地卡羅估計

    inner="second" 先以 Q₂ 推前 f_x，再以 Q₁ 推前；inner="first" 反之。
    每個外層樣本貢獻一整列內層質量，標準誤差以外層樣本為單位。
    """
    n1 = sig1.n
    box_x, box_y = f.box[:n1], f.box[n1:]
    if inner == "second":
        outer_box, inner_box = box_x, box_y
        outer_sig, inner_sig = sig1, sig2
        outer_edges, inner_edges = edges2[0], edges2[1]
    else:
        outer_box, inner_box = box_y, box_x
        outer_sig, inner_sig = sig2, sig1
        outer_edges, inner_edges = edges2[1], edges2[0]
    vol_outer = float(np.prod(outer_box[:, 1] - outer_box[:, 0]))
    vol_inner = float(np.prod(inner_box[:, 1] - inner_box[:, 0]))
    route = 0 if inner == "second" else 1
    sizes = split_jobs(n_outer, chunk)

    def job(args: tuple[int, int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        j, size = args
        rng = stream(seed, j, route)
        lo, hi = outer_box[:, 0], outer_box[:, 1]
        xo = lo + (hi - lo) * rng.random((size, len(outer_box)))
        lo_i, hi_i = inner_box[:, 0], inner_box[:, 1]
        yi = lo_i + (hi_i - lo_i) * rng.random((size, n_inner, len(inner_box)))
        xo_rep = np.repeat(xo[:, None, :], n_inner, axis=1)
        if inner == "second":
            full = np.concatenate([xo_rep, yi], axis=2)
        else:
            full = np.concatenate([yi, xo_rep], axis=2)
        values = f(full.reshape(-1, f.dim)).reshape(size, n_inner)
        t_inner = inner_sig.form(yi.reshape(-1, len(inner_box))).reshape(size, n_inner)
        idx = np.digitize(t_inner, inner_edges) - 1
        valid = (idx >= 0) & (idx < len(inner_edges) - 1)
        contrib = np.zeros((size, len(inner_edges) - 1))
        rows = np.repeat(np.arange(size)[:, None], n_inner, axis=1)
        np.add.at(contrib, (rows[valid], idx[valid]), values[valid])
        contrib *= vol_outer * vol_inner / n_inner
        t_outer = outer_sig.form(xo)
        return t_outer, contrib, np.count_nonzero(contrib, axis=1)

    parts = parallel_map(job, list(enumerate(sizes)), n_threads)
    n_o = len(outer_edges) - 1
    n_i = len(inner_edges) - 1
    sum_w = np.zeros((n_o, n_i))
    sum_w2 = np.zeros((n_o, n_i))
    count = np.zeros((n_o, n_i), dtype=np.int64)
    total_w = total_w2 = total_abs = outside = 0.0
    for t_outer, contrib, _ in parts:
        b = np.digitize(t_outer, outer_edges) - 1
        ok = (b >= 0) & (b < n_o)
        np.add.at(sum_w, b[ok], contrib[ok])
        np.add.at(sum_w2, b[ok], contrib[ok] ** 2)
        np.add.at(count, b[ok], (contrib[ok] != 0).astype(np.int64))
        row_tot = contrib.sum(axis=1)
        total_w += float(row_tot.sum())
        total_w2 += float((row_tot**2).sum())
        total_abs += float(np.abs(contrib).sum())
        outside += float(np.abs(contrib[~ok]).sum())
    if inner == "first":
        sum_w, sum_w2, count = sum_w.T, sum_w2.T, count.T
    grid = DensityGrid(
        [np.asarray(edges2[0], float), np.asarray(edges2[1], float)],
        sum_w,
        sum_w2,
        count,
        n_outer,
        total_w,
        total_w2,
        total_abs,
        outside,
        {"route": f"inner_{inner}", "seed": seed},
    )
    return grid

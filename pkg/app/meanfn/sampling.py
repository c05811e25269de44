"""
抽樣工具
可抽樣函數、計數器型可分裂亂數流與保序的平行映射
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, TypeVar

import numpy as np

from app.config import settings
from app.errors import EmptySupport

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def stream(seed: int, job: int, *key: int) -> np.random.Generator:
    """(seed, job, key…) 決定的 Philox 亂數流，與執行緒數無關"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(job, *key))))


def parallel_map(fn: Callable[[T], R], items: Sequence[T], n_threads: int | None = None) -> list[R]:
    """依輸入順序回傳結果"""
    n_threads = settings.n_threads if n_threads is None else n_threads
    if n_threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(fn, items))


def split_jobs(n_samples: int, batch_size: int | None = None) -> list[int]:
    batch_size = settings.batch_size if batch_size is None else batch_size
    if n_samples <= 0:
        return []
    full, rest = divmod(n_samples, batch_size)
    sizes = [batch_size] * full
    if rest:
        sizes.append(rest)
    return sizes


@dataclass
class SampleableFunction:
    """ℝⁿ 上的函數、支撐盒，以及可選的 (∂Q)^k f(0) 閉式值"""

    fn: Callable[[np.ndarray], np.ndarray]
    box: np.ndarray
    dq_powers: dict[int, float] = field(default_factory=dict)
    name: Optional[str] = None

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=float).reshape(-1, 2)

    @property
    def dim(self) -> int:
        return self.box.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.box[:, 1] - self.box[:, 0]))

    def check_box(self) -> None:
        if self.volume <= 0:
            raise EmptySupport(f"支撐盒體積為 0：{self.box.tolist()}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo, hi = self.box[:, 0], self.box[:, 1]
        return lo + (hi - lo) * rng.random((n, self.dim))

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(y), dtype=float)

    def scaled(self, c: float) -> "SampleableFunction":
        return SampleableFunction(
            lambda y, _f=self.fn: c * np.asarray(_f(y)),
            self.box,
            {k: c * v for k, v in self.dq_powers.items()},
            f"{c}·{self.name}",
        )


def gaussian(n: int, half_width: float = 8.0) -> SampleableFunction:
    """e^{−|y|²}，支撐盒 [−w, w]ⁿ；(∂Q)^0 f(0) = 1"""
    box = np.tile([-half_width, half_width], (n, 1))
    return SampleableFunction(lambda y: np.exp(-np.sum(y * y, axis=1)), box, {0: 1.0}, f"gaussian{n}")


def zero_function(n: int, half_width: float = 1.0) -> SampleableFunction:
    box = np.tile([-half_width, half_width], (n, 1))
    return SampleableFunction(lambda y: np.zeros(len(y)), box, {0: 0.0}, "zero")

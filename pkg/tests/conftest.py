"""
測試共用設定
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加項目根目錄到 Python 路徑
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.config import settings
from app.meanfn import stream


@pytest.fixture
def rng() -> np.random.Generator:
    return stream(20240611, 0)


@pytest.fixture
def lambdas() -> tuple[complex, complex]:
    return 1.3 + 0.4j, -0.7 + 0.2j


@pytest.fixture
def small_mc(monkeypatch):
    """縮小蒙地卡羅批次，讓測試在數秒內完成"""
    monkeypatch.setattr(settings, "n_batches", 8)
    monkeypatch.setattr(settings, "batch_size", 20_000)
    monkeypatch.setattr(settings, "support_samples", 4_000)
    monkeypatch.setattr(settings, "n_threads", 2)
    return settings

from contextlib import contextmanager
from typing import Iterator

from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    # 代數容差
    tol_inv: float = Field(default=1e-12, alias="TOL_INV")
    tol_num: float = Field(default=1e-10, alias="TOL_NUM")
    tol_regular: float = Field(default=1e-9, alias="TOL_REGULAR")
    max_condition: float = Field(default=1e8, alias="MAX_CONDITION")

    # 級數設置
    tail_tol: float = Field(default=1e-14, alias="TAIL_TOL")
    max_terms: int = Field(default=500, alias="MAX_TERMS")
    max_series_arg: float = Field(default=1e4, alias="MAX_SERIES_ARG")
    bracket_switch: float = Field(default=1e-3, alias="BRACKET_SWITCH")
    gauss_order: int = Field(default=32, alias="GAUSS_ORDER")

    # 有限差分
    fd_step: float = Field(default=1e-3, alias="FD_STEP")
    fd_step_high: float = Field(default=2e-2, alias="FD_STEP_HIGH")  # 四階算子用
    chamber_margin: float = Field(default=5.0, alias="CHAMBER_MARGIN")

    # 奇異展開擬合
    fit_t_min: float = Field(default=1e-3, alias="FIT_T_MIN")
    fit_t_max: float = Field(default=1e-1, alias="FIT_T_MAX")
    fit_probes: int = Field(default=20, alias="FIT_PROBES")

    # 銜接條件
    match_t_min: float = Field(default=1e-4, alias="MATCH_T_MIN")
    match_t_max: float = Field(default=1e-2, alias="MATCH_T_MAX")
    match_degree: int = Field(default=3, alias="MATCH_DEGREE")
    match_levels: int = Field(default=6, alias="MATCH_LEVELS")

    # 蒙地卡羅設置
    batch_size: int = Field(default=100_000, alias="BATCH_SIZE")
    n_batches: int = Field(default=32, alias="N_BATCHES")
    n_threads: int = Field(default=4, alias="N_THREADS")
    sigma_level: float = Field(default=3.0, alias="SIGMA_LEVEL")
    support_samples: int = Field(default=100_000, alias="SUPPORT_SAMPLES")
    verify_samples: int = Field(default=10_000_000, alias="VERIFY_SAMPLES")

    # 日誌與輸出
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    output_dir: str = Field(default="data/reports", alias="OUTPUT_DIR")

    def model_post_init(self, __context) -> None:
        # 執行緒數至少為 1
        if self.n_threads < 1:
            self.n_threads = 1

    class Config:
        env_file = ".env"


settings = Settings()


def apply_overrides(pairs: dict[str, str], base: Settings | None = None) -> Settings:
    """以 KEY=VAL 覆寫後的 settings 副本；KEY 可用欄位名或環境變數名，原物件不變"""
    base = settings if base is None else base
    aliases = {info.alias or name: name for name, info in Settings.model_fields.items()}
    updates = {}
    for key, value in pairs.items():
        name = key if key in Settings.model_fields else aliases.get(key.upper())
        if name is None:
            raise ValueError(f"未知的設定項：{key}")
        updates[Settings.model_fields[name].alias or name] = value
    merged = Settings.model_validate({**base.model_dump(by_alias=True), **updates})
    return base.model_copy(update={name: getattr(merged, name) for name in Settings.model_fields})


@contextmanager
def use_settings(cfg: Settings) -> Iterator[Settings]:
    """區塊內共用的 settings 取 cfg 的值，離開時還原"""
    saved = settings.model_dump()
    try:
        for name in Settings.model_fields:
            setattr(settings, name, getattr(cfg, name))
        yield settings
    finally:
        for name, value in saved.items():
            setattr(settings, name, value)

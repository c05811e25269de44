"""
報告模型
CLI 輸出的共同外框：輸入回顯、版本、種子、容差與各項檢查
"""

from datetime import datetime, timezone
from typing import Annotated, Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, BeforeValidator, Field

VERSION = "0.1.0"


def to_plain(value: Any) -> Any:
    """numpy 純量與陣列、複數與 tuple 轉成可序列化的 JSON 值"""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.generic):
        return to_plain(value.item())
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


PlainValue = Annotated[Any, BeforeValidator(to_plain)]


class CheckResult(BaseModel):
    name: str
    passed: Annotated[bool, BeforeValidator(to_plain)]
    details: Annotated[Dict[str, Any], BeforeValidator(to_plain)] = Field(default_factory=dict)


class Report(BaseModel):
    command: str
    version: str = VERSION
    seed: Optional[int] = None
    samples: Optional[int] = None
    inputs: Annotated[Dict[str, Any], BeforeValidator(to_plain)] = Field(default_factory=dict)
    tolerances: Annotated[Dict[str, Any], BeforeValidator(to_plain)] = Field(default_factory=dict)
    result: PlainValue = None
    checks: List[CheckResult] = Field(default_factory=list)
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, indent: int = 2) -> str:
        return self.model_dump_json(indent=indent)

"""
資料模型
CLI 的 JSON 輸入與報告輸出
"""

from .algebra import (
    BasisFunctionSpec,
    BlockVectorModel,
    ComplexValue,
    EvalRequest,
    HElementModel,
    parse_complex,
)
from .report import VERSION, CheckResult, PlainValue, Report, to_plain

__all__ = [
    'BasisFunctionSpec',
    'BlockVectorModel',
    'ComplexValue',
    'EvalRequest',
    'HElementModel',
    'parse_complex',
    'VERSION',
    'CheckResult',
    'PlainValue',
    'Report',
    'to_plain',
]

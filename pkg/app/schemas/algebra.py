"""
代數物件的 JSON 模型
區塊矩陣以 row-major 2×2 陣列表示；複數接受數字、[re, im]、{"re","im"} 或 Python 複數字串
"""

from typing import Annotated, Any, List, Optional

import numpy as np
from pydantic import AfterValidator, BaseModel, BeforeValidator

from app.algebra.block import BlockVector, HElement
from app.eigendist.basis import BasisFunction, BasisKind
from app.specfun import Kind


def parse_complex(value: Any) -> complex:
    if isinstance(value, bool):
        raise ValueError("布林值不是複數")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, dict):
        if set(value) - {"re", "im"}:
            raise ValueError(f"複數物件只接受 re、im：{sorted(value)}")
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", "").replace("i", "j"))
    raise ValueError(f"無法解析為複數：{value!r}")


def _check_matrix(m: List[List[float]]) -> List[List[float]]:
    if len(m) != 2 or any(len(row) != 2 for row in m):
        raise ValueError("需要 2×2 矩陣")
    return m


ComplexValue = Annotated[complex, BeforeValidator(parse_complex)]
Matrix2 = Annotated[List[List[float]], AfterValidator(_check_matrix)]


class BlockVectorModel(BaseModel):
    Y: Matrix2
    Z: Matrix2

    def to_block(self) -> BlockVector:
        return BlockVector(np.array(self.Y), np.array(self.Z))


class HElementModel(BaseModel):
    A: Matrix2
    B: Matrix2

    def to_h(self) -> HElement:
        return HElement(np.array(self.A), np.array(self.B))


class BasisFunctionSpec(BaseModel):
    which: BasisKind
    lambda1: ComplexValue
    lambda2: ComplexValue
    a_kind: Optional[Kind] = None
    b_kind: Optional[Kind] = None

    def to_basis(self) -> BasisFunction:
        return BasisFunction(
            self.which, self.lambda1, self.lambda2, self.a_kind or Kind.PHI, self.b_kind or Kind.PHI
        )


class EvalRequest(BaseModel):
    """eigendist eval 的輸入：基底函數與 X"""

    basis: BasisFunctionSpec
    X: BlockVectorModel

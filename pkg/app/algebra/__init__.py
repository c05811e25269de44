"""
代數模組
q 與 H 的區塊矩陣、對合、不變量、軌道分類、Cartan 代表元與標準形
"""

from .block import (
    COORDINATES,
    MEASURE_SCALE,
    BlockVector,
    HElement,
    adjoint,
    adjoint_matrix,
    involution,
    involution_matrix,
    random_block,
    random_h,
)
from .invariants import OrbitInvariants, charpoly_coefficients, invariants, invariants_batch, qs_batch
from .classify import Classification, OpenSetFlags, RegularityClass, classify, open_set_flags, open_set_flags_batch
from .cartan import (
    CartanClass,
    CartanData,
    NormalForm,
    Root,
    canonical_element,
    cartan_coordinates,
    cartan_data,
    cartan_projection_defect,
    normal_form,
    spectral_values,
    varpi_conjugator,
    weyl_orbit,
)

__all__ = [
    'COORDINATES',
    'MEASURE_SCALE',
    'BlockVector',
    'HElement',
    'adjoint',
    'adjoint_matrix',
    'involution',
    'involution_matrix',
    'random_block',
    'random_h',
    'OrbitInvariants',
    'charpoly_coefficients',
    'invariants',
    'invariants_batch',
    'qs_batch',
    'Classification',
    'OpenSetFlags',
    'RegularityClass',
    'classify',
    'open_set_flags',
    'open_set_flags_batch',
    'CartanClass',
    'CartanData',
    'NormalForm',
    'Root',
    'canonical_element',
    'cartan_coordinates',
    'cartan_data',
    'cartan_projection_defect',
    'normal_form',
    'spectral_values',
    'varpi_conjugator',
    'weyl_orbit',
]

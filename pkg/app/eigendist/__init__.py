"""
不變特徵分佈模組
基底 F_ana、F_sing、F⁺ 的求值、徑向分量、銜接條件、∂(P) 與弱特徵方程
"""

from .jets import (
    OPERATORS,
    PARTIAL_Q,
    PARTIAL_S,
    PARTIAL_S0,
    DiffOperator,
    InvariantPolynomial,
    Jet,
    TestFunctionJet,
    block_jets,
    character_value,
    invariant_jets,
    monomials,
)
from .basis import (
    BasisFunction,
    BasisKind,
    PLUS_KINDS,
    RadialComponents,
    all_basis,
    broken_radial,
    evaluate,
    evaluate_batch,
    radial,
    varpi_basis,
    w_bracket_radial,
)
from .matching import (
    Matching2Report,
    MatchingMReport,
    SideLimits,
    matching_2,
    matching_m,
    one_sided_derivative,
    one_sided_limit,
    richardson_limit,
)
from .weak import (
    GramReport,
    IntegrabilityReport,
    PolynomialControl,
    SupportCertificate,
    WeakEigenResult,
    certify_support,
    gram_matrix,
    inner_product,
    integrability_probe,
    partial_P,
    fit_control,
    partial_P_batch,
    weak_eigen,
)

__all__ = [
    'OPERATORS',
    'PARTIAL_Q',
    'PARTIAL_S',
    'PARTIAL_S0',
    'DiffOperator',
    'InvariantPolynomial',
    'Jet',
    'TestFunctionJet',
    'block_jets',
    'character_value',
    'invariant_jets',
    'monomials',
    'BasisFunction',
    'BasisKind',
    'PLUS_KINDS',
    'RadialComponents',
    'all_basis',
    'broken_radial',
    'evaluate',
    'evaluate_batch',
    'radial',
    'varpi_basis',
    'w_bracket_radial',
    'Matching2Report',
    'MatchingMReport',
    'SideLimits',
    'matching_2',
    'matching_m',
    'one_sided_derivative',
    'one_sided_limit',
    'richardson_limit',
    'GramReport',
    'IntegrabilityReport',
    'PolynomialControl',
    'SupportCertificate',
    'WeakEigenResult',
    'certify_support',
    'gram_matrix',
    'inner_product',
    'integrability_probe',
    'partial_P',
    'fit_control',
    'partial_P_batch',
    'weak_eigen',
]

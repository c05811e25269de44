"""
Dunkl 算子模組
秩 2 Dunkl 算子、Q 與 S 的徑向部分、移位恆等式
"""

from .polynomial import BivariatePolynomial, binomial_expand, delta_polynomial
from .operators import (
    E1,
    E2,
    PAIR_K,
    ROOTS,
    MultiplicityFunction,
    OrbitJets,
    RootDatum2,
    dunkl_apply,
    dunkl_apply_jet,
    dunkl_commutator,
    dunkl_value,
    dunkl_word,
    opdam_exact,
    orbit_jets,
    radial_q_s,
    require_invariant,
)
from .radial import (
    FDValue,
    RadialOperator,
    check_stencil,
    delta_function,
    dunkl_radial_operator,
    radial_apply,
    radial_operator,
    radial_residual,
    step_for,
    wall_distance,
)
from .functions import (
    InvariantTestFunction,
    bracket_quotient,
    constant_function,
    invariant_polynomial_function,
    lift,
    power_sum,
    product_sum,
    square_product,
)
from .checks import OpdamPoint, OpdamReport, conjugator_function, opdam_check

__all__ = [
    'BivariatePolynomial',
    'binomial_expand',
    'delta_polynomial',
    'E1',
    'E2',
    'PAIR_K',
    'ROOTS',
    'MultiplicityFunction',
    'OrbitJets',
    'RootDatum2',
    'dunkl_apply',
    'dunkl_apply_jet',
    'dunkl_commutator',
    'dunkl_value',
    'dunkl_word',
    'opdam_exact',
    'orbit_jets',
    'radial_q_s',
    'require_invariant',
    'FDValue',
    'RadialOperator',
    'check_stencil',
    'delta_function',
    'dunkl_radial_operator',
    'radial_apply',
    'radial_operator',
    'radial_residual',
    'step_for',
    'wall_distance',
    'InvariantTestFunction',
    'bracket_quotient',
    'constant_function',
    'invariant_polynomial_function',
    'lift',
    'power_sum',
    'product_sum',
    'square_product',
    'OpdamPoint',
    'OpdamReport',
    'conjugator_function',
    'opdam_check',
]

"""
特殊函數模組
級數解 Φ_λ、w_λ、W_λ、W_λ^r 與其括號組合
"""

from .series import (
    EULER_GAMMA,
    Kind,
    SeriesSolution,
    a_coefficients,
    derivatives,
    evaluate,
    evaluate_d,
    evaluate_d2,
    ode_residual,
    wronskian_constant,
)
from .brackets import SolutionPair, bracket, brackets, check_regular_character, divided_bracket, s_lambda, splus

__all__ = [
    'EULER_GAMMA',
    'Kind',
    'SeriesSolution',
    'a_coefficients',
    'derivatives',
    'evaluate',
    'evaluate_d',
    'evaluate_d2',
    'ode_residual',
    'wronskian_constant',
    'SolutionPair',
    'bracket',
    'brackets',
    'check_regular_character',
    'divided_bracket',
    's_lambda',
    'splus',
]

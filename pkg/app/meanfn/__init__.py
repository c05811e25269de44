"""
平均函數模組
任意簽名二次型的推前密度、奇異函數 η 與係數公式
"""

from .signature import Signature, eta, eta_array, eta_coefficient, predicted_coefficient
from .sampling import SampleableFunction, gaussian, parallel_map, split_jobs, stream, zero_function
from .density import (
    DensityGrid,
    iterated_mean_density,
    mean_density,
    mean_density_2,
    one_sided_log_edges,
    pushforward,
    symmetric_log_edges,
    uniform_edges,
)
from .fit import (
    CoefficientCheck,
    ExpansionFit,
    PolynomialFit,
    coefficient_check,
    fit_binned_profile,
    fit_edges,
    fit_polynomial_profile,
    fit_sampled_profile,
    log_eta,
    probes,
    singular_fit,
    window_mask,
)

__all__ = [
    'Signature',
    'eta',
    'eta_array',
    'eta_coefficient',
    'predicted_coefficient',
    'SampleableFunction',
    'gaussian',
    'parallel_map',
    'split_jobs',
    'stream',
    'zero_function',
    'DensityGrid',
    'iterated_mean_density',
    'mean_density',
    'mean_density_2',
    'one_sided_log_edges',
    'pushforward',
    'symmetric_log_edges',
    'uniform_edges',
    'CoefficientCheck',
    'ExpansionFit',
    'PolynomialFit',
    'coefficient_check',
    'fit_binned_profile',
    'fit_edges',
    'fit_polynomial_profile',
    'fit_sampled_profile',
    'log_eta',
    'probes',
    'singular_fit',
    'window_mask',
]

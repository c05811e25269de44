"""
軌道積分模組
Weyl 積分公式下的密度 Mf_m、Mf₂ 與其奇異結構檢查
"""

from .testfn import QTestFunction, UNIT_BALL_VOLUME_8, bump_profile, unit_ball, unit_sphere
from .densities import (
    INVARIANT_FUNCTIONS,
    OrbitalDensities,
    WeylEntry,
    direct_integral,
    jacobian_2,
    jacobian_m,
    jacobian_r,
    orbital_densities,
    split_log_axis,
    suggest_edges,
    weyl_check,
    weyl_report,
    weyl_rhs,
)
from .checks import HLogReport, HypairReport, hlog_check, hypair_check
from .descent import descent_psi, descent_psi3, descent_psi3_batch, descent_psi_batch

__all__ = [
    'QTestFunction',
    'UNIT_BALL_VOLUME_8',
    'bump_profile',
    'unit_ball',
    'unit_sphere',
    'INVARIANT_FUNCTIONS',
    'OrbitalDensities',
    'WeylEntry',
    'direct_integral',
    'jacobian_2',
    'jacobian_m',
    'jacobian_r',
    'orbital_densities',
    'split_log_axis',
    'suggest_edges',
    'weyl_check',
    'weyl_report',
    'weyl_rhs',
    'HLogReport',
    'HypairReport',
    'hlog_check',
    'hypair_check',
    'descent_psi',
    'descent_psi3',
    'descent_psi3_batch',
    'descent_psi_batch',
]

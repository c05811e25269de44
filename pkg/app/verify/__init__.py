"""
驗證套件模組
algebra、meanfn、orbint、specfun、dunkl、matching、weak、integrability 與 all
"""

from .suites import LAMBDAS, SUITES, TOLERANCES, chamber_points, run_suite, weak_bump

__all__ = [
    'LAMBDAS',
    'SUITES',
    'TOLERANCES',
    'chamber_points',
    'run_suite',
    'weak_bump',
]

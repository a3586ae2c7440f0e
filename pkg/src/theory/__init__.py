"""
Closed-form predictions: semicircle quantities, limit laws and quadrature
"""

from src.theory.semicircle import (
    SemicirclePoint,
    c_theta,
    g_sigma,
    gamma_covariance,
    gaussian_entry_variance,
    limit_variance_factor,
    neg_inv_gprime,
    on_branch_cut,
    outlier_location,
    pi_cov,
    stieltjes_g,
)
from src.theory.limits import CaseALimit, CaseBLimit, caseA_limit_sampler, caseB_limit
from src.theory.quadrature import (
    QuadratureRule,
    TestFunction,
    semicircle_quadrature,
    testfn_mean,
    testfn_variance,
)

__all__ = [
    'SemicirclePoint',
    'c_theta',
    'g_sigma',
    'gamma_covariance',
    'gaussian_entry_variance',
    'limit_variance_factor',
    'neg_inv_gprime',
    'on_branch_cut',
    'outlier_location',
    'pi_cov',
    'stieltjes_g',
    'CaseALimit',
    'CaseBLimit',
    'caseA_limit_sampler',
    'caseB_limit',
    'QuadratureRule',
    'TestFunction',
    'semicircle_quadrature',
    'testfn_mean',
    'testfn_variance',
]

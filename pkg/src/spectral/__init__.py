"""
Dense Hermitian storage, eigensolver and resolvent forms
"""

from src.spectral.dense import DenseHermitian
from src.spectral.eigensolver import SOLVER_METHODS, EigDecomp, EigenSolver, eigh
from src.spectral.resolvent import ResolventForms, XiMatrix, resolvent_quadform, xi_matrix
from src.spectral.deformed import deformed_matrix, deformed_spectrum, deformed_topk, outlier_slots

__all__ = [
    'DenseHermitian',
    'SOLVER_METHODS',
    'EigDecomp',
    'EigenSolver',
    'eigh',
    'ResolventForms',
    'XiMatrix',
    'resolvent_quadform',
    'xi_matrix',
    'deformed_matrix',
    'deformed_spectrum',
    'deformed_topk',
    'outlier_slots',
]

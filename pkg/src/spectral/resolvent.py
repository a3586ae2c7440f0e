"""
Resolvent bilinear forms <u, R(z) v> with R(z) = (z I - A)^{-1} and the
Xi matrix of one spike, all evaluated through a single eigendecomposition.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from src.deformation.frames import Frame
from src.spectral.eigensolver import EigDecomp
from src.theory.semicircle import outlier_location, require_supercritical
from src.utils.errors import NearSingularShiftError, WignerSpikesError

logger = logging.getLogger(__name__)

SHIFT_GUARD = 1e-8
HERMITIAN_TOLERANCE = 1e-12


def _check_shift(eig: EigDecomp, z: complex) -> np.ndarray:
    if eig.vectors is None:
        raise WignerSpikesError("invalid-matrix", "resolvent forms need eigenvectors")
    gaps = complex(z) - eig.values
    distance = float(np.min(np.abs(gaps)))
    if distance < SHIFT_GUARD:
        raise NearSingularShiftError(f"z={z} is within {distance:.3e} of the spectrum")
    return gaps


def resolvent_quadform(eig: EigDecomp, z: complex, u: np.ndarray, v: np.ndarray) -> complex:
    """<u, R(z) v> = sum_k conj(Q^* u)_k (Q^* v)_k / (z - lambda_k)"""
    gaps = _check_shift(eig, z)
    qu = eig.vectors.conj().T @ np.asarray(u)
    qv = eig.vectors.conj().T @ np.asarray(v)
    return complex(np.sum(np.conj(qu) * qv / gaps))


class ResolventForms:
    """Projections Q^* U computed once, reused for every z and every pair (l, p)"""

    def __init__(self, eig: EigDecomp, columns: np.ndarray):
        if eig.vectors is None:
            raise WignerSpikesError("invalid-matrix", "resolvent forms need eigenvectors")
        columns = np.asarray(columns)
        if columns.ndim == 1:
            columns = columns[:, None]
        if columns.shape[0] != eig.n:
            raise WignerSpikesError("invalid-dimension", f"vectors of length {columns.shape[0]} for n={eig.n}")
        self.eig = eig
        self.projections = eig.vectors.conj().T @ columns

    def matrix(self, z: complex) -> np.ndarray:
        """k x k matrix of <u^l, R(z) u^p>"""
        gaps = _check_shift(self.eig, z)
        weighted = self.projections / gaps[:, None]
        return self.projections.conj().T @ weighted


@dataclass(frozen=True, eq=False)
class XiMatrix:
    """sqrt(N) (<u^l, R(rho) u^p> - delta_lp / theta), Hermitized"""

    entries: np.ndarray
    theta: float
    rho: float

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Ascending eigenvalues y_1 <= ... <= y_k"""
        return np.linalg.eigvalsh(self.entries)


def xi_matrix(eig: EigDecomp, frame: Frame, theta: float, sigma: float = 1.0) -> XiMatrix:
    """Xi matrix of one spike from the eigendecomposition of X_N.

    Raises:
        BelowPhaseTransitionError: |theta| <= sigma
        NearSingularShiftError: rho_theta within 1e-8 of the spectrum of X_N
    """
    require_supercritical(theta, sigma)
    rho = outlier_location(theta, sigma)
    quad = ResolventForms(eig, frame.columns).matrix(rho)
    xi = math.sqrt(eig.n) * (quad - np.eye(frame.k) / theta)
    xi = 0.5 * (xi + xi.conj().T)
    if not np.iscomplexobj(eig.vectors) and not np.iscomplexobj(frame.columns):
        xi = xi.real
    return XiMatrix(entries=xi, theta=theta, rho=rho)

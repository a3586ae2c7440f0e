"""
Limit laws of the rescaled outliers c_theta sqrt(N) (lambda - rho_theta).

Case B (delocalized eigenvectors): eigenvalues of a k x k GOE/GUE matrix
with entry variance theta^2 sigma^2 / (theta^2 - sigma^2) plus the
third-moment shift (1/theta^2) (1/N) <u^l, M_3 u^p>.

Case A (eigenvectors on K fixed coordinates): eigenvalues of
U^* (W + H) U with W an unscaled K x K Wigner matrix from the entry law and
H an independent Gaussian matrix.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.deformation.frames import Frame
from src.ensemble.entry_laws import EntryLaw, MomentProfile, m3_quadform
from src.theory.semicircle import require_supercritical, gaussian_entry_variance
from src.utils.errors import WignerSpikesError
from src.utils.rng import stream

logger = logging.getLogger(__name__)


def _hermitian_gaussian(rng: np.random.Generator, size: int, beta: int) -> np.ndarray:
    """GOE/GUE matrix with unit off-diagonal variance E|H_st|^2 = 1"""
    if beta == 1:
        g = rng.standard_normal((size, size))
        return (g + g.T) / math.sqrt(2.0)
    g = (rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))) / math.sqrt(2.0)
    return (g + g.conj().T) / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class CaseBLimit:
    """GOE/GUE fluctuation law of one spike's outliers with delocalized frame"""

    gaussian_variance: float
    shift: np.ndarray
    beta: int
    theta: float = 0.0
    sigma: float = 1.0

    @property
    def k(self) -> int:
        return self.shift.shape[0]

    def entry_variance(self, diagonal: bool) -> float:
        """Variance of a diagonal (2/beta times) or off-diagonal entry"""
        return (2.0 / self.beta) * self.gaussian_variance if diagonal else self.gaussian_variance

    def outlier_variance(self) -> float:
        """Variance of the scalar limit when k = 1"""
        return self.entry_variance(diagonal=True)

    def outlier_mean(self) -> float:
        """Mean of the scalar limit when k = 1"""
        return float(np.real(self.shift[0, 0]))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One draw of the ordered (ascending) limit eigenvalues"""
        noise = math.sqrt(self.gaussian_variance) * _hermitian_gaussian(rng, self.k, self.beta)
        return np.linalg.eigvalsh(noise + self.shift)


def caseB_limit(theta: float, sigma: float, beta: int, frame: Frame, profile: MomentProfile, n: int) -> CaseBLimit:
    """Build the Case B limit for one spike.

    Args:
        theta: Spike eigenvalue with |theta| > sigma
        sigma: Off-diagonal standard deviation
        beta: 1 (real symmetric) or 2 (Hermitian)
        frame: Orthonormal eigenvectors of the spike
        profile: Moments of the entry law
        n: Matrix dimension
    """
    require_supercritical(theta, sigma)
    if beta not in (1, 2):
        raise WignerSpikesError("invalid-symmetry-class", f"beta must be 1 or 2, got {beta}")
    if frame.n != n:
        raise WignerSpikesError("invalid-dimension", f"frame length {frame.n} does not match n={n}")
    k = frame.k
    complex_shift = np.iscomplexobj(frame.columns)
    shift = np.zeros((k, k), dtype=np.complex128 if complex_shift else np.float64)
    if profile.third_moment != 0.0:
        for l in range(k):
            for p in range(k):
                shift[l, p] = m3_quadform(profile, frame.column(l), frame.column(p)) / theta ** 2
    return CaseBLimit(
        gaussian_variance=gaussian_entry_variance(theta, sigma),
        shift=shift,
        beta=beta,
        theta=theta,
        sigma=sigma,
    )


class CaseALimit:
    """Sampler for the Case A limit U^* (W + H) U.

    Args:
        theta: Spike eigenvalue with |theta| > sigma
        sigma: Off-diagonal standard deviation of the entry law
        beta: Symmetry class
        law: Entry law of W_N, used unscaled for the K x K block W
        U: K x k matrix with orthonormal columns
    """

    def __init__(self, theta: float, sigma: float, beta: int, law: EntryLaw, U: np.ndarray,
                 fourth_moment: Optional[float] = None):
        require_supercritical(theta, sigma)
        if beta not in (1, 2):
            raise WignerSpikesError("invalid-symmetry-class", f"beta must be 1 or 2, got {beta}")
        U = np.atleast_2d(np.asarray(U))
        if U.shape[1] > U.shape[0]:
            raise WignerSpikesError("invalid-frame", f"U must be K x k with k <= K, got {U.shape}")
        deviation = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[1]))))
        if deviation > 1e-12:
            raise WignerSpikesError("invalid-frame", f"columns of U are not orthonormal (deviation {deviation:.3e})")
        self.theta = theta
        self.sigma = sigma
        self.beta = beta
        self.law = law
        self.U = U
        m4 = law.moments(beta).fourth_moment if fourth_moment is None else fourth_moment
        t2, s2 = theta * theta, sigma * sigma
        self.offdiag_variance = s2 * s2 / (t2 - s2)
        # sigma^4 keeps the fourth-cumulant term dimensionally consistent
        self.diag_variance = (m4 - (4 - beta) * s2 * s2) / t2 + (2.0 / beta) * s2 * s2 / (t2 - s2)
        if self.diag_variance < 0:
            raise WignerSpikesError("negative-variance", f"E(H_ss^2) = {self.diag_variance} is negative")

    @property
    def support(self) -> int:
        return self.U.shape[0]

    def _wigner_block(self, rng: np.random.Generator) -> np.ndarray:
        size = self.support
        dtype = np.float64 if self.beta == 1 else np.complex128
        w = np.zeros((size, size), dtype=dtype)
        rows, cols = np.triu_indices(size, k=1)
        if rows.size:
            w[rows, cols] = self.law.draw_offdiag(rng, rows.size, self.beta)
            w[cols, rows] = np.conj(w[rows, cols])
        w[np.diag_indices(size)] = self.law.draw_diag(rng, size, self.beta)
        return w

    def _gaussian_block(self, rng: np.random.Generator) -> np.ndarray:
        size = self.support
        h = math.sqrt(self.offdiag_variance) * _hermitian_gaussian(rng, size, self.beta)
        h[np.diag_indices(size)] = math.sqrt(self.diag_variance) * rng.standard_normal(size)
        return h

    def sample_matrix(self, rng: np.random.Generator) -> np.ndarray:
        v = self.U.conj().T @ (self._wigner_block(rng) + self._gaussian_block(rng)) @ self.U
        return 0.5 * (v + v.conj().T)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Ordered (ascending) eigenvalues of one draw of V"""
        return np.linalg.eigvalsh(self.sample_matrix(rng))


def caseA_limit_sampler(theta: float, sigma: float, beta: int, law: EntryLaw, U: np.ndarray,
                        seed: int, profile: Optional[MomentProfile] = None) -> np.ndarray:
    """One draw of the ordered eigenvalues of V = U^* (W + H) U.

    ``profile`` overrides the fourth moment taken from ``law`` when given.
    """
    fourth_moment = None if profile is None else profile.fourth_moment
    limit = CaseALimit(theta, sigma, beta, law, U, fourth_moment)
    return limit.sample(stream(seed))

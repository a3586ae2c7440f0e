"""
Closed-form semicircle quantities: Stieltjes transform, outlier map and the
covariance kernels of resolvent fluctuations.

The square root in g is taken as sqrt(z - 2 sigma) * sqrt(z + 2 sigma) with
principal branches, which puts the cut exactly on [-2 sigma, 2 sigma] and
selects the branch decaying at infinity on both half-lines.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.utils.errors import BelowPhaseTransitionError, WignerSpikesError

logger = logging.getLogger(__name__)

BRANCH_CUT_TOLERANCE = 1e-12
KERNEL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SemicirclePoint:
    """g_sigma and its derivative at one point off the cut"""

    z: complex
    g: complex
    g_prime: complex
    sigma: float

    def residual(self) -> float:
        """|sigma^2 g^2 - z g + 1|, zero for a valid point"""
        return abs(self.sigma ** 2 * self.g ** 2 - self.z * self.g + 1.0)


def _check_sigma(sigma: float) -> None:
    if not sigma > 0:
        raise WignerSpikesError("invalid-parameter", f"sigma must be positive, got {sigma}")


def on_branch_cut(z: complex, sigma: float) -> bool:
    """True for points on the open cut (-2 sigma, 2 sigma) up to the tolerance"""
    z = complex(z)
    return abs(z.imag) <= BRANCH_CUT_TOLERANCE and abs(z.real) < 2.0 * sigma


def g_sigma(z, sigma: float = 1.0) -> np.ndarray:
    """Vectorized Stieltjes transform; no branch-cut check"""
    z = np.asarray(z, dtype=np.complex128)
    root = np.sqrt(z - 2.0 * sigma) * np.sqrt(z + 2.0 * sigma)
    return (z - root) / (2.0 * sigma * sigma)


def stieltjes_g(z: complex, sigma: float = 1.0) -> SemicirclePoint:
    """Stieltjes transform of the semicircle law and its derivative.

    Args:
        z: Point outside [-2 sigma, 2 sigma]; the end points are accepted
        sigma: Standard deviation of the off-diagonal entries

    Returns:
        SemicirclePoint with g = (z - s) / (2 sigma^2), s = sqrt(z - 2 sigma) sqrt(z + 2 sigma)
    """
    _check_sigma(sigma)
    z = complex(z)
    if on_branch_cut(z, sigma):
        raise WignerSpikesError("on-branch-cut", f"z={z} lies on the cut [-{2 * sigma}, {2 * sigma}]")
    root = complex(np.sqrt(z - 2.0 * sigma) * np.sqrt(z + 2.0 * sigma))
    g = (z - root) / (2.0 * sigma * sigma)
    if root == 0:
        # derivative diverges at the spectral edges
        g_prime = complex(-math.inf, 0.0)
    else:
        g_prime = (1.0 - z / root) / (2.0 * sigma * sigma)
    return SemicirclePoint(z=z, g=g, g_prime=g_prime, sigma=sigma)


def outlier_location(theta: float, sigma: float = 1.0) -> Optional[float]:
    """rho_theta = theta + sigma^2 / theta, or None when |theta| <= sigma"""
    _check_sigma(sigma)
    if theta == 0:
        raise WignerSpikesError("invalid-spike", "spike eigenvalue theta must be nonzero")
    if abs(theta) <= sigma:
        return None
    return theta + sigma * sigma / theta


def require_supercritical(theta: float, sigma: float) -> None:
    _check_sigma(sigma)
    if abs(theta) <= sigma:
        raise BelowPhaseTransitionError(theta, sigma)


def c_theta(theta: float, sigma: float = 1.0) -> float:
    """theta^2 / (theta^2 - sigma^2)"""
    require_supercritical(theta, sigma)
    return theta * theta / (theta * theta - sigma * sigma)


def neg_inv_gprime(theta: float, sigma: float = 1.0) -> float:
    """-1 / g'(rho_theta) = theta^2 - sigma^2"""
    require_supercritical(theta, sigma)
    return theta * theta - sigma * sigma


def gaussian_entry_variance(theta: float, sigma: float = 1.0) -> float:
    """theta^2 sigma^2 / (theta^2 - sigma^2), the GOE/GUE entry variance of the outlier limit"""
    require_supercritical(theta, sigma)
    return theta * theta * sigma * sigma / (theta * theta - sigma * sigma)


def pi_cov(z1: complex, z2: complex, sigma: float = 1.0) -> complex:
    """Pi(z1, z2) = -g1 g2 + g1 g2 / (1 - sigma^2 g1 g2)"""
    g1 = stieltjes_g(z1, sigma).g
    g2 = stieltjes_g(z2, sigma).g
    product = g1 * g2
    denominator = 1.0 - sigma * sigma * product
    if abs(denominator) <= KERNEL_TOLERANCE:
        raise WignerSpikesError("kernel-singularity", f"1 - sigma^2 g(z1) g(z2) vanishes at z1={z1}, z2={z2}")
    return -product + product / denominator


def limit_variance_factor(z1: complex, z2: complex, sigma: float = 1.0) -> complex:
    """-1 + 1 / (1 - sigma^2 g(z1) g(z2))"""
    g1 = stieltjes_g(z1, sigma).g
    g2 = stieltjes_g(z2, sigma).g
    denominator = 1.0 - sigma * sigma * g1 * g2
    if abs(denominator) <= KERNEL_TOLERANCE:
        raise WignerSpikesError("kernel-singularity", f"1 - sigma^2 g(z1) g(z2) vanishes at z1={z1}, z2={z2}")
    return -1.0 + 1.0 / denominator


def gamma_covariance(z1: complex, z2: complex, same_index: bool, beta: int,
                     sigma: float = 1.0) -> np.ndarray:
    """Covariance of the real and imaginary parts of Gamma_lp(z1), Gamma_lp(z2).

    With real_indicator = 1 for beta=1 and 0 for beta=2:

        E[Gamma(z1) Gamma(z2)]       = (real_indicator + delta) Pi(z1, z2)
        E[Gamma(z1) conj Gamma(z2)]  = (1 + delta real_indicator) Pi(z1, conj z2)

    Returns:
        [[E Re1 Re2, E Re1 Im2], [E Im1 Re2, E Im1 Im2]]
    """
    if beta not in (1, 2):
        raise WignerSpikesError("invalid-symmetry-class", f"beta must be 1 or 2, got {beta}")
    real_indicator = 1.0 if beta == 1 else 0.0
    delta = 1.0 if same_index else 0.0
    z1, z2 = complex(z1), complex(z2)
    plain = (real_indicator + delta) * pi_cov(z1, z2, sigma)
    mixed = (1.0 + delta * real_indicator) * pi_cov(z1, z2.conjugate(), sigma)
    re_re = 0.5 * (plain + mixed).real
    im_im = 0.5 * (mixed - plain).real
    re_im = 0.5 * (plain.imag - mixed.imag)
    im_re = 0.5 * (plain.imag + mixed.imag)
    return np.array([[re_re, re_im], [im_re, im_im]])

"""
Entry laws for Wigner matrices with analytic moments.

Each law is built from a centered, unit-variance base distribution and
scaled by ``sigma`` (off-diagonal) or ``diag_sigma`` (diagonal). The
moments the limit laws need (variance, third moment
E|W|^2 W and fourth moment E|W|^4) are known in closed form for every
supported kind and both symmetry classes.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.utils.errors import WignerSpikesError

logger = logging.getLogger(__name__)

LAW_KINDS = ("gaussian", "rademacher", "standardized-bernoulli", "uniform")

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class MomentProfile:
    """Off-diagonal moments of an entry law for one symmetry class"""

    variance: float
    third_moment: float
    fourth_moment: float
    diag_variance: float = 0.0

    def __post_init__(self):
        if self.fourth_moment < self.variance ** 2 * (1.0 - 1e-12):
            raise WignerSpikesError(
                "invalid-parameter",
                f"fourth moment {self.fourth_moment} below variance squared {self.variance ** 2}",
            )


@dataclass(frozen=True)
class EntryLaw:
    """Centered scalar distribution used for the entries of W_N.

    Args:
        kind: One of ``LAW_KINDS``
        sigma: Off-diagonal standard deviation
        diag_sigma: Diagonal standard deviation; None selects the GOE/GUE
            convention sqrt(2/beta) * sigma
        p: Success probability of the standardized Bernoulli law
    """

    kind: str = "gaussian"
    sigma: float = 1.0
    diag_sigma: Optional[float] = None
    p: float = 0.5

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise WignerSpikesError("invalid-parameter", f"unknown entry law kind '{self.kind}'")
        if not self.sigma > 0:
            raise WignerSpikesError("invalid-parameter", f"sigma must be positive, got {self.sigma}")
        if self.diag_sigma is not None and self.diag_sigma < 0:
            raise WignerSpikesError("invalid-parameter", f"diag_sigma must be non-negative, got {self.diag_sigma}")
        if self.kind == "standardized-bernoulli" and not 0.0 < self.p < 1.0:
            raise WignerSpikesError("invalid-parameter", f"Bernoulli p must lie in (0, 1), got {self.p}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EntryLaw":
        """Build from a config entry such as {"kind": "standardized-bernoulli", "p": 0.2}"""
        allowed = {"kind", "sigma", "diag_sigma", "p"}
        unknown = set(data) - allowed
        if unknown:
            raise WignerSpikesError("invalid-config", f"unknown entry law keys: {sorted(unknown)}")
        diag_sigma = data.get("diag_sigma")
        return cls(
            kind=str(data.get("kind", "gaussian")),
            sigma=float(data.get("sigma", 1.0)),
            diag_sigma=None if diag_sigma is None else float(diag_sigma),
            p=float(data.get("p", 0.5)),
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "sigma": self.sigma, "diag_sigma": self.diag_sigma}
        if self.kind == "standardized-bernoulli":
            data["p"] = self.p
        return data

    @property
    def is_symmetric(self) -> bool:
        """True when W and -W have the same distribution"""
        return self.kind != "standardized-bernoulli" or self.p == 0.5

    def effective_diag_sigma(self, beta: int) -> float:
        if self.diag_sigma is not None:
            return self.diag_sigma
        return math.sqrt(2.0 / beta) * self.sigma

    def unit_moments(self) -> Tuple[float, float]:
        """(third, fourth) moment of the unit-variance base law"""
        if self.kind == "gaussian":
            return 0.0, 3.0
        if self.kind == "rademacher":
            return 0.0, 1.0
        if self.kind == "uniform":
            return 0.0, 9.0 / 5.0
        p, q = self.p, 1.0 - self.p
        return (q - p) / math.sqrt(p * q), (1.0 - 3.0 * p * q) / (p * q)

    def moments(self, beta: int = 1) -> MomentProfile:
        """Analytic off-diagonal moments for the given symmetry class"""
        _check_beta(beta)
        mu3, m4 = self.unit_moments()
        s = self.sigma
        if beta == 1:
            third, fourth = s ** 3 * mu3, s ** 4 * m4
        else:
            # W = s (X + i S Y) / sqrt(2): the sign S keeps E|W|^2 W real
            third = s ** 3 * mu3 / 2.0 ** 1.5
            fourth = s ** 4 * (m4 + 1.0) / 2.0
        return MomentProfile(
            variance=s * s,
            third_moment=third,
            fourth_moment=fourth,
            diag_variance=self.effective_diag_sigma(beta) ** 2,
        )

    def draw_unit(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draws from the centered unit-variance base law"""
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        if self.kind == "rademacher":
            return 2.0 * rng.integers(0, 2, size=size).astype(np.float64) - 1.0
        if self.kind == "uniform":
            return rng.uniform(-_SQRT3, _SQRT3, size=size)
        hits = (rng.random(size) < self.p).astype(np.float64)
        return (hits - self.p) / math.sqrt(self.p * (1.0 - self.p))

    def draw_offdiag(self, rng: np.random.Generator, size: int, beta: int = 1) -> np.ndarray:
        """Off-diagonal entries of W_N (unscaled by 1/sqrt(N))"""
        if beta == 1:
            return self.sigma * self.draw_unit(rng, size)
        real = self.draw_unit(rng, size)
        imag = self.draw_unit(rng, size)
        sign = 2.0 * rng.integers(0, 2, size=size).astype(np.float64) - 1.0
        return self.sigma * (real + 1j * sign * imag) / math.sqrt(2.0)

    def draw_diag(self, rng: np.random.Generator, size: int, beta: int = 1) -> np.ndarray:
        """Diagonal entries of W_N, always real"""
        return self.effective_diag_sigma(beta) * self.draw_unit(rng, size)

    def support(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """(values, probabilities) of the unit base law, None if continuous"""
        if self.kind == "rademacher":
            return np.array([-1.0, 1.0]), np.array([0.5, 0.5])
        if self.kind == "standardized-bernoulli":
            scale = math.sqrt(self.p * (1.0 - self.p))
            values = np.array([(1.0 - self.p) / scale, -self.p / scale])
            return values, np.array([self.p, 1.0 - self.p])
        return None

    def truncated_mean(self, threshold: float, beta: int = 1) -> float:
        """E[W 1{|W| <= threshold}] for an off-diagonal entry.

        Symmetric kinds give 0. The Bernoulli law is summed over its support;
        for beta=2 the imaginary part averages out through the random sign.
        """
        _check_beta(beta)
        if self.is_symmetric:
            return 0.0
        values, probs = self.support()
        if beta == 1:
            w = self.sigma * values
            return float(np.sum(probs * w * (np.abs(w) <= threshold)))
        re = self.sigma * values[:, None] / math.sqrt(2.0)
        im = self.sigma * values[None, :] / math.sqrt(2.0)
        weight = probs[:, None] * probs[None, :]
        kept = np.hypot(re, im) <= threshold
        return float(np.sum(weight * re * kept))


def _check_beta(beta: int) -> None:
    if beta not in (1, 2):
        raise WignerSpikesError("invalid-symmetry-class", f"beta must be 1 or 2, got {beta}")


def m3_quadform(profile: MomentProfile, u: np.ndarray, v: np.ndarray) -> complex:
    """(1/N) <u, M_3 v> for a homogeneous third-moment matrix.

    M_3 has mu_3 off the diagonal and zeros on it, so the form reduces to
    (mu_3 / N) * [conj(sum u) * sum v - <u, v>].

    Args:
        profile: Moments of the entry law
        u: Unit vector
        v: Unit vector

    Returns:
        float for real inputs, complex otherwise
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 1:
        raise WignerSpikesError("invalid-vector", f"vectors must be 1-d of equal length, got {u.shape} and {v.shape}")
    for name, vec in (("u", u), ("v", v)):
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > 1e-12:
            raise WignerSpikesError("invalid-vector", f"{name} is not a unit vector (norm {norm!r})")
    n = u.shape[0]
    value = profile.third_moment / n * (np.conj(u.sum()) * v.sum() - np.vdot(u, v))
    if np.iscomplexobj(u) or np.iscomplexobj(v):
        return complex(value)
    return float(np.real(value))

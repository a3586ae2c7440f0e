"""
Spectrum of the deformed matrix X_N + A_N.
"""

import logging
from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np

from src.deformation.frames import Frame, SpikeSpec, apply_perturbation, build_frames
from src.spectral.eigensolver import EigDecomp, EigenSolver
from src.utils.errors import WignerSpikesError

if TYPE_CHECKING:
    from src.ensemble.wigner import WignerSample

logger = logging.getLogger(__name__)


def deformed_matrix(x: "WignerSample", spec: SpikeSpec, frames: Optional[Sequence[Frame]] = None) -> np.ndarray:
    """Dense X_N + A_N, with A_N applied in factored form to the identity"""
    dense = x.matrix.to_dense()
    if not len(spec):
        return dense
    if frames is None:
        frames = build_frames(spec, x.n)
    perturbation = apply_perturbation(spec, frames, np.eye(x.n))
    if x.beta == 1:
        perturbation = np.real(perturbation)
    return dense + perturbation


def deformed_spectrum(x: "WignerSample", spec: SpikeSpec, frames: Optional[Sequence[Frame]] = None,
                      method: str = "householder-ql") -> EigDecomp:
    """All eigenvalues (ascending) of X_N + A_N"""
    return EigenSolver(method).decompose(deformed_matrix(x, spec, frames), want_vectors=False)


def deformed_topk(x: "WignerSample", spec: SpikeSpec, k: int, frames: Optional[Sequence[Frame]] = None,
                  method: str = "householder-ql") -> np.ndarray:
    """Top-k eigenvalues of X_N + A_N in descending order"""
    if not 1 <= k <= x.n:
        raise WignerSpikesError("invalid-dimension", f"k must lie in 1..{x.n}, got {k}")
    return deformed_spectrum(x, spec, frames, method).top(k)


def outlier_slots(spec: SpikeSpec, sigma: float) -> List[List[int]]:
    """Indices into the ascending eigenvalue array for the outliers of each spike.

    Positive super-critical spikes own the top of the spectrum in spike order,
    negative ones the bottom (the most negative spike owns the lowest
    eigenvalues). Top indices are negative (-1 is the largest eigenvalue);
    every list is in ascending eigenvalue order. Sub-critical spikes get an
    empty list.
    """
    slots: List[List[int]] = []
    top_used = 0
    bottom_counts = []
    for spike in spec.spikes:
        if spike.theta > sigma:
            slots.append(list(range(-(top_used + spike.mult), -top_used)))
            top_used += spike.mult
        else:
            slots.append([])
        bottom_counts.append(spike.mult if spike.theta < -sigma else 0)
    bottom_used = 0
    for index in range(len(spec) - 1, -1, -1):
        count = bottom_counts[index]
        if count:
            slots[index] = list(range(bottom_used, bottom_used + count))
            bottom_used += count
    return slots

"""
Sampling of scaled Wigner matrices X_N = W_N / sqrt(N) and the truncated,
re-centered variant used by the centering results.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from src.ensemble.entry_laws import EntryLaw
from src.spectral.dense import DenseHermitian, diagonal_positions
from src.utils.errors import WignerSpikesError
from src.utils.rng import stream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WignerSample:
    """One draw of X_N together with the inputs that reproduce it"""

    matrix: DenseHermitian
    n: int
    beta: int
    seed: int
    law: Optional[EntryLaw] = None
    truncated: bool = False


class WignerSampler:
    """Fills the packed upper triangle row by row.

    Row ``i`` owns the Philox stream keyed by (seed, i): it draws the
    diagonal entry first, then the n - i - 1 entries to its right. Rows are
    therefore independent of the order in which they are filled.
    """

    def __init__(self, law: EntryLaw, n: int, beta: int = 1):
        if n < 2:
            raise WignerSpikesError("invalid-dimension", f"Wigner matrices need n >= 2, got {n}")
        if beta not in (1, 2):
            raise WignerSpikesError("invalid-symmetry-class", f"beta must be 1 or 2, got {beta}")
        self.law = law
        self.n = n
        self.beta = beta

    def sample(self, seed: int) -> WignerSample:
        n = self.n
        dtype = np.float64 if self.beta == 1 else np.complex128
        storage = np.empty(n * (n + 1) // 2, dtype=dtype)
        offset = 0
        for i in range(n):
            rng = stream(seed, i)
            storage[offset] = self.law.draw_diag(rng, 1, self.beta)[0]
            width = n - i - 1
            if width:
                storage[offset + 1:offset + 1 + width] = self.law.draw_offdiag(rng, width, self.beta)
            offset += width + 1
        storage /= math.sqrt(n)
        matrix = DenseHermitian(storage=storage, n=n, beta=self.beta)
        return WignerSample(matrix=matrix, n=n, beta=self.beta, seed=int(seed), law=self.law)


def sample_wigner(law: EntryLaw, n: int, beta: int, seed: int) -> WignerSample:
    """Draw X_N for the given entry law; identical arguments give identical bits"""
    return WignerSampler(law, n, beta).sample(seed)


def truncate_center(sample: WignerSample) -> WignerSample:
    """Truncate off-diagonal entries at N^{1/4} and re-center them.

    Works on W = sqrt(N) X: entries with |W_ij| > N^{1/4} are zeroed, the
    truncated mean of the entry law is subtracted from every off-diagonal
    entry and the diagonal is set to 0. The result is rescaled by 1/sqrt(N).
    """
    if sample.law is None:
        raise WignerSpikesError("invalid-matrix", "truncation needs the entry law of the sample")
    n = sample.n
    root_n = math.sqrt(n)
    threshold = n ** 0.25
    x = np.array(sample.matrix.storage)
    offdiag = np.ones(x.shape[0], dtype=bool)
    offdiag[diagonal_positions(n)] = False
    large = offdiag & (np.abs(x) * root_n > threshold)
    clipped = int(np.count_nonzero(large))
    if clipped:
        logger.debug(f"Truncation zeroed {clipped} entries above {threshold:.4f}")
    x[large] = 0.0
    shift = sample.law.truncated_mean(threshold, sample.beta)
    if shift:
        x[offdiag] -= shift / root_n
    x[~offdiag] = 0.0
    matrix = sample.matrix.replace_storage(x)
    return replace(sample, matrix=matrix, truncated=True)

"""
Steinitz rearrangement of zero-sum vector families.

The permutation is built from the back. For k = N, N-1, ..., m+1 we keep an
active set A_k of k indices and weights lam in [0, 1]^k with

    sum lam_i v_i = 0,    sum lam_i = k - m.

Every prefix sum over A_k then equals sum (1 - lam_i) v_i, whose sup norm
is at most m * c. Scaling lam by (k-1-m)/(k-m) keeps both constraints
feasible for k - 1; pivoting along null vectors of [v_F; 1] on groups of
m + 2 fractional weights reaches a vertex, which always has a zero weight.
That index is dropped and takes position k.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.utils.errors import WignerSpikesError

logger = logging.getLogger(__name__)

ZERO_SUM_TOLERANCE = 1e-10
_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class SteinitzResult:
    """Permutation (0-based, prefix order) plus the bound it achieves"""

    permutation: np.ndarray
    prefix_bound: float
    constant: int
    bound: float

    @property
    def guaranteed(self) -> float:
        """K * c, the bound the construction promises"""
        return self.constant * self.bound

    @property
    def satisfied(self) -> bool:
        return self.prefix_bound <= self.guaranteed * (1.0 + 1e-9) + 1e-12


def _null_vector(block: np.ndarray) -> np.ndarray:
    system = np.vstack([block.T, np.ones(block.shape[0])])
    _, _, vt = np.linalg.svd(system)
    return vt[-1]


def _pivot_to_vertex(vectors: np.ndarray, active: np.ndarray, lam: np.ndarray, dim: int) -> None:
    """Move ``lam`` (weights of ``active``) to a vertex in place"""
    while True:
        fractional = np.flatnonzero((lam > _EPS) & (lam < 1.0 - _EPS))
        if fractional.size <= dim + 1:
            break
        group = fractional[:dim + 2]
        direction = _null_vector(vectors[active[group]])
        current = lam[group]
        # largest step keeping the group inside [0, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            up = np.where(direction > _EPS, (1.0 - current) / direction, np.inf)
            down = np.where(direction < -_EPS, -current / direction, np.inf)
        step = float(min(up.min(), down.min()))
        if not np.isfinite(step):
            raise WignerSpikesError("not-zero-sum", "pivot direction vanished")
        updated = current + step * direction
        updated[np.abs(updated) <= _EPS] = 0.0
        updated[np.abs(updated - 1.0) <= _EPS] = 1.0
        # the blocking coordinate lands exactly on its bound
        blocking = int(np.argmin(np.minimum(up, down)))
        updated[blocking] = 1.0 if direction[blocking] > 0 else 0.0
        lam[group] = np.clip(updated, 0.0, 1.0)


def prefix_sup_norm(vectors: np.ndarray, permutation: np.ndarray) -> float:
    """max_t || sum_{i <= t} v_{pi(i)} ||_inf"""
    if vectors.shape[0] == 0:
        return 0.0
    partial = np.cumsum(vectors[permutation], axis=0)
    return float(np.max(np.abs(partial)))


def steinitz_permute(vectors: np.ndarray, bound: Optional[float] = None) -> SteinitzResult:
    """Rearrange a zero-sum family so every prefix sum stays within m * c.

    Args:
        vectors: N x m real array whose rows sum to zero
        bound: c, an upper bound on every entry's magnitude; defaults to the
            largest entry

    Returns:
        SteinitzResult with the permutation and the achieved prefix bound
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise WignerSpikesError("invalid-dimension", f"expected an N x m array, got shape {vectors.shape}")
    n, dim = vectors.shape
    total = np.abs(vectors.sum(axis=0)).max() if n else 0.0
    if total > ZERO_SUM_TOLERANCE:
        raise WignerSpikesError("not-zero-sum", f"family sums to {total:.3e} in sup norm")
    largest = float(np.abs(vectors).max()) if vectors.size else 0.0
    if bound is None:
        bound = largest
    elif largest > bound * (1.0 + 1e-12):
        raise WignerSpikesError("invalid-vector", f"entry magnitude {largest} exceeds bound {bound}")

    if n <= dim or largest == 0.0:
        permutation = np.arange(n)
        return SteinitzResult(permutation, prefix_sup_norm(vectors, permutation), dim, float(bound))

    order = np.empty(n, dtype=np.int64)
    active = np.arange(n)
    lam = np.full(n, (n - dim) / n)
    _pivot_to_vertex(vectors, active, lam, dim)
    for k in range(n, dim, -1):
        lam *= (k - 1 - dim) / (k - dim)
        _pivot_to_vertex(vectors, active, lam, dim)
        drop = int(np.argmin(lam))
        order[k - 1] = active[drop]
        active = np.delete(active, drop)
        lam = np.delete(lam, drop)
    order[:dim] = active

    achieved = prefix_sup_norm(vectors, order)
    logger.debug(f"Steinitz permutation of {n} vectors in R^{dim}: prefix bound {achieved:.4e}")
    return SteinitzResult(order, achieved, dim, float(bound))


def steinitz_family(columns: np.ndarray) -> np.ndarray:
    """Zero-sum family in R^{k^2} built from k orthonormal columns.

    Row i holds |u_i^l|^2 - 1/N for each l, then Re and Im of
    conj(u_i^l) u_i^p for each pair l < p. Orthonormality makes every
    coordinate sum to zero.
    """
    columns = np.asarray(columns)
    n, k = columns.shape
    parts = [np.abs(columns) ** 2 - 1.0 / n]
    for l in range(k):
        for p in range(l + 1, k):
            cross = np.conj(columns[:, l]) * columns[:, p]
            parts.append(np.real(cross)[:, None])
            parts.append(np.imag(cross)[:, None])
    return np.hstack(parts).astype(np.float64)

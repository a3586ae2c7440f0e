"""
Packed storage for real symmetric and complex Hermitian matrices.

Only the upper triangle is stored (row-major, diagonal included), so a
``DenseHermitian`` is equal to its conjugate transpose by construction.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from src.utils.errors import WignerSpikesError


@lru_cache(maxsize=32)
def upper_indices(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the packed upper triangle"""
    rows, cols = np.triu_indices(n)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@lru_cache(maxsize=32)
def diagonal_positions(n: int) -> np.ndarray:
    """Positions of the diagonal entries inside packed storage"""
    i = np.arange(n)
    positions = i * n - (i * (i - 1)) // 2
    positions.setflags(write=False)
    return positions


@dataclass(frozen=True, eq=False)
class DenseHermitian:
    """N x N real symmetric (beta=1) or complex Hermitian (beta=2) matrix"""

    storage: np.ndarray
    n: int
    beta: int

    def __post_init__(self):
        object.__setattr__(self, "storage", np.array(self.storage, copy=True))
        if self.n < 1:
            raise WignerSpikesError("invalid-dimension", f"n must be positive, got {self.n}")
        if self.beta not in (1, 2):
            raise WignerSpikesError("invalid-symmetry-class", f"beta must be 1 or 2, got {self.beta}")
        expected = self.n * (self.n + 1) // 2
        if self.storage.shape != (expected,):
            raise WignerSpikesError(
                "invalid-dimension",
                f"packed storage for n={self.n} needs {expected} entries, got {self.storage.shape}",
            )
        if self.beta == 1 and np.iscomplexobj(self.storage):
            raise WignerSpikesError("invalid-symmetry-class", "beta=1 storage must be real")
        self.storage.setflags(write=False)

    @classmethod
    def from_dense(cls, matrix: np.ndarray, beta: Optional[int] = None) -> "DenseHermitian":
        """Pack the upper triangle of a square matrix.

        The lower triangle is ignored. For beta=2 the imaginary part of the
        diagonal is dropped.
        """
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise WignerSpikesError("invalid-dimension", f"expected a square matrix, got shape {matrix.shape}")
        if beta is None:
            beta = 2 if np.iscomplexobj(matrix) else 1
        n = matrix.shape[0]
        rows, cols = upper_indices(n)
        if beta == 1:
            if np.iscomplexobj(matrix):
                raise WignerSpikesError("invalid-symmetry-class", "complex entries given for beta=1")
            storage = matrix[rows, cols].astype(np.float64)
        else:
            storage = matrix[rows, cols].astype(np.complex128)
            diag = diagonal_positions(n)
            storage[diag] = storage[diag].real
        return cls(storage=storage, n=n, beta=beta)

    @property
    def dtype(self) -> np.dtype:
        return self.storage.dtype

    def to_dense(self) -> np.ndarray:
        """Materialize the full matrix with the lower triangle mirrored"""
        rows, cols = upper_indices(self.n)
        dense = np.zeros((self.n, self.n), dtype=self.storage.dtype)
        dense[cols, rows] = np.conj(self.storage)
        dense[rows, cols] = self.storage
        return dense

    def diagonal(self) -> np.ndarray:
        return self.storage[diagonal_positions(self.n)].real.copy()

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.storage))) if self.storage.size else 0.0

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.storage)))

    def replace_storage(self, storage: np.ndarray) -> "DenseHermitian":
        """New matrix of the same shape and symmetry class"""
        return DenseHermitian(storage=storage, n=self.n, beta=self.beta)

"""
Dense symmetric/Hermitian eigensolver.

The native method reduces the matrix to real symmetric tridiagonal form
with Householder reflections (a unitary diagonal phase scaling removes the
complex phases of the sub-diagonal for beta=2) and then runs implicit-shift
QL with accumulated rotations. The ``lapack`` method delegates the same
algorithm family to ``scipy.linalg.eigh`` and is what the Monte Carlo
experiments use at large N.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg

from src.spectral.dense import DenseHermitian
from src.utils.errors import WignerSpikesError

logger = logging.getLogger(__name__)

SOLVER_METHODS = ("householder-ql", "lapack")

MAX_QL_SWEEPS = 60


@dataclass(frozen=True, eq=False)
class EigDecomp:
    """Ascending eigenvalues with (optionally) orthonormal eigenvectors as columns"""

    values: np.ndarray
    vectors: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.array(self.values, copy=True))
        self.values.setflags(write=False)
        if self.vectors is not None:
            object.__setattr__(self, "vectors", np.array(self.vectors, copy=True))
            self.vectors.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def descending(self) -> np.ndarray:
        """Eigenvalues in the lambda_1 >= ... >= lambda_N order"""
        return self.values[::-1].copy()

    def top(self, k: int) -> np.ndarray:
        return self.values[::-1][:k].copy()

    def bottom(self, k: int) -> np.ndarray:
        return self.values[:k].copy()

    def reconstruct(self) -> np.ndarray:
        """Q diag(lambda) Q^*"""
        if self.vectors is None:
            raise WignerSpikesError("invalid-matrix", "decomposition has no eigenvectors")
        return (self.vectors * self.values) @ self.vectors.conj().T

    def apply_function(self, func, u: np.ndarray, v: np.ndarray) -> complex:
        """<u, f(A) v> through the spectral decomposition"""
        if self.vectors is None:
            raise WignerSpikesError("invalid-matrix", "decomposition has no eigenvectors")
        qu = self.vectors.conj().T @ u
        qv = self.vectors.conj().T @ v
        return complex(np.sum(np.conj(qu) * func(self.values) * qv))


def householder_tridiagonalize(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns:
        (d, e, q): diagonal, real sub-diagonal and a unitary q with
        matrix = q @ T @ q^*, where T = tridiag(e, d, e)
    """
    a = np.array(matrix, dtype=np.complex128 if np.iscomplexobj(matrix) else np.float64)
    n = a.shape[0]
    q = np.eye(n, dtype=a.dtype)
    sub = np.zeros(max(n - 1, 0), dtype=a.dtype)
    for k in range(n - 1):
        x = a[k + 1:, k].copy()
        if x.shape[0] == 1 or np.linalg.norm(x[1:]) == 0.0:
            sub[k] = x[0]
            continue
        norm_x = np.linalg.norm(x)
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        alpha = -phase * norm_x
        v = x
        v[0] -= alpha
        v /= np.linalg.norm(v)
        # H A H with H = I - 2 v v^*, as a rank-2 update of the trailing block
        block = a[k + 1:, k + 1:]
        p = 2.0 * (block @ v)
        w = p - np.vdot(v, p) * v
        block -= np.outer(v, w.conj()) + np.outer(w, v.conj())
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = alpha
        a[k, k + 1] = np.conj(alpha)
        sub[k] = alpha
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
    d = np.real(np.diag(a)).copy()
    if np.iscomplexobj(sub):
        # D^* T D is real for d_{k+1} = d_k e_k / |e_k|
        phases = np.ones(n, dtype=np.complex128)
        for k in range(n - 1):
            magnitude = abs(sub[k])
            phases[k + 1] = phases[k] * (sub[k] / magnitude if magnitude > 0 else 1.0)
        q = q * phases
        e = np.abs(sub)
    else:
        e = sub.astype(np.float64)
    return d, e, q


def tridiagonal_ql(d: np.ndarray, e: np.ndarray, z: Optional[np.ndarray] = None) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Implicit-shift QL on a real symmetric tridiagonal matrix.

    Args:
        d: Diagonal (length n)
        e: Sub-diagonal (length n - 1)
        z: Matrix whose columns are rotated along (eigenvectors of the
            original matrix when z is the tridiagonalizing transform)

    Returns:
        (eigenvalues unsorted, rotated z or None)
    """
    d = np.array(d, dtype=np.float64)
    n = d.shape[0]
    off = np.zeros(n)
    off[:n - 1] = e
    # rows of zt are the columns of z
    zt = None if z is None else np.array(z).T.copy()
    eps = np.finfo(np.float64).eps
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                scale = abs(d[m]) + abs(d[m + 1])
                if abs(off[m]) <= eps * scale:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > MAX_QL_SWEEPS:
                raise WignerSpikesError("invalid-matrix", f"QL iteration did not converge for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * off[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + off[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * off[i]
                b = c * off[i]
                r = np.hypot(f, g)
                off[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    off[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if zt is not None:
                    upper = zt[i + 1].copy()
                    zt[i + 1] = s * zt[i] + c * upper
                    zt[i] = c * zt[i] - s * upper
            if deflated:
                continue
            d[l] -= p
            off[l] = g
            off[m] = 0.0
    return d, None if zt is None else zt.T.copy()


def _orthonormalize_clusters(values: np.ndarray, vectors: np.ndarray, scale: float) -> np.ndarray:
    """Re-orthonormalize eigenvectors inside clusters of (near) equal eigenvalues"""
    tolerance = 1e-12 * max(scale, 1.0)
    start = 0
    n = values.shape[0]
    for stop in range(1, n + 1):
        if stop < n and values[stop] - values[stop - 1] <= tolerance:
            continue
        if stop - start > 1:
            q, _ = np.linalg.qr(vectors[:, start:stop])
            vectors[:, start:stop] = q
        start = stop
    return vectors


class EigenSolver:
    """Eigen decomposition of DenseHermitian matrices.

    Args:
        method: ``householder-ql`` (self-contained) or ``lapack``
            (scipy.linalg.eigh, driver ``ev``)
    """

    def __init__(self, method: str = "householder-ql"):
        if method not in SOLVER_METHODS:
            raise WignerSpikesError("invalid-parameter", f"unknown eigensolver method '{method}'")
        self.method = method

    def decompose(self, matrix: Union[DenseHermitian, np.ndarray], want_vectors: bool = True) -> EigDecomp:
        if isinstance(matrix, DenseHermitian):
            dense = matrix.to_dense()
        else:
            dense = np.asarray(matrix)
            if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
                raise WignerSpikesError("invalid-dimension", f"expected a square matrix, got {dense.shape}")
        if dense.shape[0] < 1:
            raise WignerSpikesError("invalid-dimension", "empty matrix")
        if not np.all(np.isfinite(dense)):
            raise WignerSpikesError("invalid-matrix", "matrix has non-finite entries")

        if self.method == "lapack":
            if want_vectors:
                values, vectors = scipy.linalg.eigh(dense, driver="ev", check_finite=False)
            else:
                values = scipy.linalg.eigh(dense, eigvals_only=True, driver="ev", check_finite=False)
                vectors = None
        else:
            d, e, q = householder_tridiagonalize(dense)
            values, vectors = tridiagonal_ql(d, e, q if want_vectors else None)

        order = np.argsort(values, kind="stable")
        values = np.asarray(values, dtype=np.float64)[order]
        if vectors is not None:
            vectors = np.array(vectors[:, order])
            scale = float(np.max(np.abs(dense)))
            vectors = _orthonormalize_clusters(values, vectors, scale)
        return EigDecomp(values=values, vectors=vectors)


def eigh(matrix: Union[DenseHermitian, np.ndarray], want_vectors: bool = True,
         method: str = "householder-ql") -> EigDecomp:
    """All eigenvalues (ascending) and optionally eigenvectors of a Hermitian matrix"""
    return EigenSolver(method).decompose(matrix, want_vectors)

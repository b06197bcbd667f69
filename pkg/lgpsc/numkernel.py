"""Dense symmetric linear algebra used by every model.

Everything here is a pure function of its inputs. Eigenvectors and singular
vectors are returned with a fixed sign: the entry of largest magnitude in each
column is positive (first such entry when several tie).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionError, InputError

SymMatrix = NDArray[np.float64]


@dataclass(frozen=True)
class EigenPairs:
    values: NDArray[np.float64]
    vectors: NDArray[np.float64]

    @property
    def d(self) -> int:
        return int(self.values.shape[0])


def as_sym_matrix(M: ArrayLike) -> SymMatrix:
    """Validate a square finite matrix and return its exact symmetrization."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise InputError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix contains non-finite entries")
    return 0.5 * (A + A.T)


def fix_signs(V: NDArray[np.float64]) -> NDArray[np.float64]:
    """Flip columns so each column's largest-|entry| is positive."""
    V = np.array(V, dtype=np.float64, copy=True)
    if V.size == 0:
        return V
    mags = np.abs(V)
    # Magnitudes within rounding of the column max count as ties; argmax on the
    # mask picks the lowest such index.
    near = mags >= mags.max(axis=0) * (1.0 - 1e-10)
    idx = np.argmax(near, axis=0)
    pivots = V[idx, np.arange(V.shape[1])]
    V[:, pivots < 0] *= -1.0
    return V


def sym_eig_smallest(M: ArrayLike, d: int) -> EigenPairs:
    """The d algebraically smallest eigenpairs of a symmetric matrix, ascending."""
    A = as_sym_matrix(M)
    n = A.shape[0]
    if d < 1 or d > n:
        raise DimensionError(f"cannot take {d} eigenpairs of a {n}x{n} matrix")
    values, vectors = scipy.linalg.eigh(A, subset_by_index=[0, d - 1], driver="evr")
    order = np.argsort(values, kind="stable")
    return EigenPairs(values=values[order], vectors=fix_signs(vectors[:, order]))


def sym_eig_full(M: ArrayLike) -> EigenPairs:
    A = as_sym_matrix(M)
    values, vectors = scipy.linalg.eigh(A)
    order = np.argsort(values, kind="stable")
    return EigenPairs(values=values[order], vectors=fix_signs(vectors[:, order]))


def gram(X: ArrayLike) -> SymMatrix:
    """Pairwise inner products of the rows of X (the points-Gram matrix)."""
    A = np.asarray(X, dtype=np.float64)
    if A.ndim != 2:
        raise InputError(f"expected a 2-D data matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("data matrix contains non-finite entries")
    G = A @ A.T
    return 0.5 * (G + G.T)


def largest_eigenvalue(M: ArrayLike) -> float:
    A = as_sym_matrix(M)
    n = A.shape[0]
    if not np.any(A):
        return 0.0
    top = scipy.linalg.eigvalsh(A, subset_by_index=[n - 1, n - 1])
    return float(top[0])


def left_singular_vectors(A: ArrayLike, d: int) -> NDArray[np.float64]:
    """Orthonormal basis of the top-d left singular subspace of A."""
    B = np.asarray(A, dtype=np.float64)
    if B.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise InputError("matrix contains non-finite entries")
    if d < 1 or d > min(B.shape):
        raise DimensionError(f"cannot take {d} singular vectors of a {B.shape[0]}x{B.shape[1]} matrix")
    U, _s, _vt = scipy.linalg.svd(B, full_matrices=False, lapack_driver="gesvd")
    return fix_signs(U[:, :d])


def projector(V: ArrayLike) -> NDArray[np.float64]:
    """Orthogonal projector onto the column span of V (columns assumed orthonormal)."""
    B = np.asarray(V, dtype=np.float64)
    return B @ B.T


def projector_distance(U: ArrayLike, V: ArrayLike) -> float:
    """Spectral-norm distance between the projectors of two orthonormal bases."""
    diff = projector(U) - projector(V)
    return float(np.linalg.norm(diff, ord=2))

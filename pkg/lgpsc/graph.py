"""kNN graphs, Gaussian similarities and Laplacians.

Points are rows of the data matrix. Neighbor search is exact and brute force;
distance ties go to the lower point index.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sparse
from numpy.typing import ArrayLike, NDArray
from scipy.sparse.csgraph import laplacian as _csgraph_laplacian
from scipy.spatial.distance import cdist

from .errors import InputError, ParameterError

logger = logging.getLogger(__name__)

DataMatrix = NDArray[np.float64]
Sigma = float | str
Symmetrization = Literal["union", "mutual"]

AUTO = "auto"

_SCALED_AUTO_RE = re.compile(
    r"^\s*(?:auto\s*(?P<op>[*/])\s*(?P<f1>[0-9.eE+-]+)|(?P<f2>[0-9.eE+-]+)\s*\*\s*auto)\s*$"
)


@dataclass(frozen=True)
class KnnGraph:
    k: int
    neighbors: NDArray[np.int64]
    distances: NDArray[np.float64]

    @property
    def n(self) -> int:
        return int(self.neighbors.shape[0])


def as_data_matrix(X: ArrayLike) -> DataMatrix:
    A = np.asarray(X, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise InputError(f"data matrix must be 2-D, got shape {A.shape}")
    n, m = A.shape
    if n < 2 or m < 1:
        raise InputError(f"data matrix needs at least 2 points and 1 feature, got {n}x{m}")
    if not np.all(np.isfinite(A)):
        raise InputError("data matrix contains non-finite values")
    return A


def parse_sigma(sigma: Sigma) -> tuple[float | None, float]:
    """Split a sigma setting into (fixed value or None for auto, auto multiplier)."""
    if isinstance(sigma, bool):
        raise ParameterError(f"invalid sigma: {sigma!r}")
    if isinstance(sigma, (int, float)):
        if not np.isfinite(sigma) or sigma <= 0:
            raise ParameterError(f"sigma must be positive, got {sigma!r}")
        return float(sigma), 1.0
    text = str(sigma).strip().lower()
    if text == AUTO:
        return None, 1.0
    m = _SCALED_AUTO_RE.match(text)
    if m is None:
        try:
            return parse_sigma(float(text))
        except ValueError:
            raise ParameterError(f"invalid sigma: {sigma!r}") from None
    try:
        factor = float(m.group("f1") or m.group("f2"))
    except ValueError:
        raise ParameterError(f"invalid sigma: {sigma!r}") from None
    if not np.isfinite(factor) or factor <= 0:
        raise ParameterError(f"sigma multiplier must be positive, got {sigma!r}")
    if m.group("op") == "/":
        factor = 1.0 / factor
    return None, factor


def resolve_sigma(sigma: Sigma, edge_distances: ArrayLike) -> float:
    fixed, scale = parse_sigma(sigma)
    if fixed is not None:
        return fixed
    dist = np.asarray(edge_distances, dtype=np.float64).ravel()
    med = float(np.median(dist)) if dist.size else 0.0
    if med <= 0.0:
        med = 1.0
    return med * scale


def knn_search(X: ArrayLike, k: int) -> KnnGraph:
    A = as_data_matrix(X)
    n = A.shape[0]
    if k < 1 or k > n - 1:
        raise ParameterError(f"k must be in [1, {n - 1}], got {k}")
    dist = cdist(A, A, metric="euclidean")
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    distances = np.take_along_axis(dist, order, axis=1)
    return KnnGraph(k=k, neighbors=order.astype(np.int64), distances=distances)


def gaussian_similarity(
    X: ArrayLike,
    G: KnnGraph,
    sigma: Sigma = AUTO,
    *,
    symmetrization: Symmetrization = "union",
) -> sparse.csr_matrix:
    """W[i, j] = exp(-d(x_i, x_j)^2 / sigma^2) on kNN edges, 0 elsewhere."""
    A = as_data_matrix(X)
    n = G.n
    if A.shape[0] != n:
        raise InputError(f"graph has {n} points but data has {A.shape[0]}")
    s = resolve_sigma(sigma, G.distances)
    rows = np.repeat(np.arange(n), G.k)
    cols = G.neighbors.ravel()
    vals = np.exp(-(G.distances.ravel() ** 2) / (s * s))
    directed = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    if symmetrization == "union":
        W = directed.maximum(directed.T)
    elif symmetrization == "mutual":
        W = directed.minimum(directed.T)
    else:
        raise ParameterError(f"unknown symmetrization: {symmetrization!r}")
    # knn never contains i itself, so the diagonal stays empty.
    W = sparse.csr_matrix(W)
    W.eliminate_zeros()
    logger.debug(f"gaussian_similarity n={n} k={G.k} sigma={s:.6g} nnz={W.nnz}")
    return W


def similarity_graph(
    X: ArrayLike,
    k: int,
    sigma: Sigma = AUTO,
    *,
    symmetrization: Symmetrization = "union",
) -> sparse.csr_matrix:
    return gaussian_similarity(X, knn_search(X, k), sigma, symmetrization=symmetrization)


def _symmetry_gap(W: NDArray[np.float64] | sparse.csr_matrix) -> tuple[float, float]:
    if sparse.issparse(W):
        diff = abs(W - W.T)
        gap = float(diff.max()) if diff.nnz else 0.0
        scale = float(abs(W).max()) if W.nnz else 0.0
        return gap, scale
    return float(np.max(np.abs(W - W.T), initial=0.0)), float(np.max(np.abs(W), initial=0.0))


def laplacian(W: ArrayLike | sparse.spmatrix) -> NDArray[np.float64]:
    """Unnormalized Laplacian L = D - W as a dense symmetric matrix."""
    if sparse.issparse(W):
        S = sparse.csr_matrix(W, dtype=np.float64)
        if S.shape[0] != S.shape[1]:
            raise InputError(f"similarity matrix must be square, got shape {S.shape}")
        if S.nnz and S.data.min() < 0:
            raise InputError("similarity matrix has negative entries")
        M: NDArray[np.float64] | sparse.csr_matrix = S
    else:
        D = np.asarray(W, dtype=np.float64)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise InputError(f"similarity matrix must be square, got shape {D.shape}")
        if np.any(D < 0):
            raise InputError("similarity matrix has negative entries")
        M = D
    gap, scale = _symmetry_gap(M)
    if gap > 1e-12 * max(1.0, scale):
        raise InputError(f"similarity matrix is not symmetric (max |W - W^T| = {gap:.3g})")
    L = _csgraph_laplacian(M, normed=False)
    if sparse.issparse(L):
        L = L.toarray()
    return np.asarray(L, dtype=np.float64)

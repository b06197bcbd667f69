"""Clustering models.

- ``sc``: classic spectral clustering on the unnormalized kNN-Gaussian Laplacian.
- ``scpca``: d smallest eigenvectors of (1 - beta)(I - G/lambda) + beta L/zeta,
  where G is the points-Gram matrix (PCA term) and L the graph Laplacian.
- ``multilevel``: L augmented with the Laplacian of the mean-point cloud pulled
  back through the neighborhood membership matrix, optionally over several
  coarsening levels.
- ``cosine_sc``: spectral clustering under cosine similarity via the left
  singular vectors of D^{-1/2} X.
- ``kmeans``: k-means on the raw features.

Every spectral model finishes with k-means on the rows of its embedding.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
from numpy.typing import ArrayLike, NDArray

from .config import ModelConfig
from .errors import DegenerateInputError, ParameterError
from .graph import (
    DataMatrix,
    KnnGraph,
    as_data_matrix,
    gaussian_similarity,
    knn_search,
    laplacian,
)
from .kmeans import Labeling, kmeans_fit
from .numkernel import (
    SymMatrix,
    as_sym_matrix,
    gram,
    largest_eigenvalue,
    left_singular_vectors,
    sym_eig_smallest,
)

logger = logging.getLogger(__name__)

SimilarityBuilder = Callable[..., sparse.spmatrix]
FitFunction = Callable[[ArrayLike, ModelConfig], Labeling]


@dataclass(frozen=True)
class MeanPoints:
    Z: DataMatrix
    H: NDArray[np.float64]
    k: int


def _check_clusters(X: DataMatrix, cfg: ModelConfig):
    if X.shape[0] <= cfg.d:
        raise ParameterError(f"need more points than clusters: n={X.shape[0]}, d={cfg.d}")


def spectral_embedding(M: ArrayLike, d: int) -> NDArray[np.float64]:
    return sym_eig_smallest(M, d).vectors


def _point_graph(X: DataMatrix, cfg: ModelConfig) -> tuple[KnnGraph, sparse.csr_matrix]:
    G = knn_search(X, cfg.k)
    W = gaussian_similarity(X, G, cfg.sigma, symmetrization=cfg.symmetrization)
    return G, W


def sc_fit_similarity(W: ArrayLike | sparse.spmatrix, cfg: ModelConfig) -> Labeling:
    """Spectral clustering from a precomputed similarity matrix."""
    Y = spectral_embedding(laplacian(W), cfg.d)
    return kmeans_fit(Y, cfg.kmeans_config())


def sc_fit(X: ArrayLike, cfg: ModelConfig) -> Labeling:
    A = as_data_matrix(X)
    _check_clusters(A, cfg)
    _G, W = _point_graph(A, cfg)
    logger.debug(f"sc_fit n={A.shape[0]} k={cfg.k} sigma={cfg.sigma}")
    return sc_fit_similarity(W, cfg)


def scpca_matrix(X: ArrayLike, L: ArrayLike, beta: float) -> SymMatrix:
    """(1 - beta)(I - G/lambda) + beta L/zeta with G the points-Gram matrix of X."""
    if not 0.0 <= beta <= 1.0:
        raise ParameterError(f"beta must lie in [0, 1], got {beta}")
    A = as_data_matrix(X)
    Lap = as_sym_matrix(L)
    n = A.shape[0]
    if Lap.shape[0] != n:
        raise ParameterError(f"Laplacian order {Lap.shape[0]} does not match {n} points")

    M = np.zeros((n, n), dtype=np.float64)
    if beta < 1.0:
        G = gram(A)
        lam = largest_eigenvalue(G)
        if lam <= 0.0:
            raise DegenerateInputError("points-Gram matrix is zero; the PCA term is undefined")
        M += (1.0 - beta) * (np.eye(n) - G / lam)
    if beta > 0.0:
        zeta = largest_eigenvalue(Lap)
        # An empty graph has zeta == 0 and contributes nothing.
        if zeta > 0.0:
            M += beta * (Lap / zeta)
    return as_sym_matrix(M)


def scpca_fit(X: ArrayLike, cfg: ModelConfig) -> Labeling:
    A = as_data_matrix(X)
    _check_clusters(A, cfg)
    _G, W = _point_graph(A, cfg)
    L = laplacian(W)
    if cfg.center_data:
        A = A - A.mean(axis=0)
    M = scpca_matrix(A, L, cfg.beta)
    logger.debug(f"scpca_fit n={A.shape[0]} k={cfg.k} beta={cfg.beta} centered={cfg.center_data}")
    return kmeans_fit(spectral_embedding(M, cfg.d), cfg.kmeans_config())


def pca_scores(X: ArrayLike, d: int) -> NDArray[np.float64]:
    """Top-d principal component scores of the centered data."""
    A = as_data_matrix(X)
    A = A - A.mean(axis=0)
    U = left_singular_vectors(A, d)
    return U * np.linalg.norm(A.T @ U, axis=0)


def mean_points(X: ArrayLike, G: KnnGraph) -> MeanPoints:
    """z_i = mean of x_i and its k nearest neighbors; H marks {i} plus knn(i)."""
    A = as_data_matrix(X)
    n = A.shape[0]
    if G.n != n:
        raise ParameterError(f"graph has {G.n} points but data has {n}")
    H = np.zeros((n, n), dtype=np.float64)
    rows = np.arange(n)
    H[rows, rows] = 1.0
    H[np.repeat(rows, G.k), G.neighbors.ravel()] = 1.0
    Z = (H @ A) / (G.k + 1)
    return MeanPoints(Z=Z, H=H, k=G.k)


def _pullback(Lp: NDArray[np.float64], P: NDArray[np.float64]) -> SymMatrix:
    return as_sym_matrix(P.T @ Lp @ P)


def _mean_point_laplacian(
    Z: DataMatrix,
    cfg: ModelConfig,
    similarity: SimilarityBuilder,
) -> NDArray[np.float64]:
    G = knn_search(Z, cfg.coarse_k)
    W = similarity(Z, G, cfg.sigma, symmetrization=cfg.symmetrization)
    return laplacian(W)


def _membership_scale(k: int, cfg: ModelConfig) -> float:
    return 1.0 if cfg.raw_coarse_scale else 1.0 / (k + 1)


def coarse_laplacian(
    Z: MeanPoints,
    cfg: ModelConfig,
    *,
    similarity: SimilarityBuilder = gaussian_similarity,
) -> SymMatrix:
    """L'' = s^2 H^T L' H with L' the Laplacian of the mean points.

    s = 1/(k+1) unless ``cfg.raw_coarse_scale``.
    """
    Lp = _mean_point_laplacian(Z.Z, cfg, similarity)
    return _pullback(Lp, Z.H * _membership_scale(Z.k, cfg))


def multilevel_fit(
    X: ArrayLike,
    cfg: ModelConfig,
    *,
    coarse_similarity: SimilarityBuilder = gaussian_similarity,
) -> Labeling:
    """Embed with the d smallest eigenvectors of L + sum over levels of pulled-back L'."""
    A = as_data_matrix(X)
    _check_clusters(A, cfg)
    G, W = _point_graph(A, cfg)
    M = laplacian(W)

    Z = A
    P: NDArray[np.float64] | None = None
    for level in range(1, cfg.levels + 1):
        if level > 1:
            G = knn_search(Z, cfg.k)
        mp = mean_points(Z, G)
        step = mp.H * _membership_scale(cfg.k, cfg)
        P = step if P is None else step @ P
        M = M + _pullback(_mean_point_laplacian(mp.Z, cfg, coarse_similarity), P)
        Z = mp.Z
        logger.debug(f"multilevel level={level} k={cfg.k} k_prime={cfg.coarse_k}")

    return kmeans_fit(spectral_embedding(M, cfg.d), cfg.kmeans_config())


def cosine_degrees(X: ArrayLike) -> NDArray[np.float64]:
    """Row sums of the cosine-similarity matrix, computed as Xn (Xn^T 1)."""
    A = as_data_matrix(X)
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateInputError("cosine similarity is undefined for zero rows")
    Xn = A / norms[:, None]
    return Xn @ (Xn.T @ np.ones(A.shape[0]))


def cosine_sc_fit(X: ArrayLike, cfg: ModelConfig) -> Labeling:
    A = as_data_matrix(X)
    _check_clusters(A, cfg)
    deg = cosine_degrees(A)
    if np.any(deg <= 0.0):
        raise DegenerateInputError("cosine-similarity degree is not positive for some points")
    Xn = A / np.linalg.norm(A, axis=1)[:, None]
    Y = left_singular_vectors(Xn / np.sqrt(deg)[:, None], cfg.d)
    return kmeans_fit(Y, cfg.kmeans_config())


def kmeans_baseline_fit(X: ArrayLike, cfg: ModelConfig) -> Labeling:
    return kmeans_fit(as_data_matrix(X), cfg.kmeans_config())


MODELS: dict[str, tuple[FitFunction, str]] = {
    "kmeans": (kmeans_baseline_fit, "k-means++ Lloyd on raw features"),
    "sc": (sc_fit, "spectral clustering, unnormalized kNN-Gaussian Laplacian"),
    "scpca": (scpca_fit, "spectral clustering blended with PCA (beta weights the Laplacian)"),
    "multilevel": (multilevel_fit, "spectral clustering plus mean-point Laplacian, per level"),
    "cosine_sc": (cosine_sc_fit, "cosine-similarity spectral clustering via SVD of D^-1/2 X"),
}


def get_model(model_id: str) -> FitFunction:
    try:
        return MODELS[model_id][0]
    except KeyError:
        raise ParameterError(f"unknown model {model_id!r}; choose from {', '.join(MODELS)}") from None

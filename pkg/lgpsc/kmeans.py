"""Seeded Lloyd's k-means with k-means++ seeding and restarts."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.distance import cdist

from .errors import InputError, ParameterError

logger = logging.getLogger(__name__)

Labeling = NDArray[np.int64]


class KMeansConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    d: int = Field(ge=1, description="Number of clusters.")
    seed: int = Field(default=0, ge=0, lt=2**64)
    restarts: int = Field(default=10, ge=1)
    max_iter: int = Field(default=300, ge=1)
    tol: float = Field(default=1e-6, ge=0.0, description="Relative change of the objective.")
    init: Literal["k-means++", "random"] = "k-means++"


@dataclass(frozen=True)
class KMeansResult:
    labels: Labeling
    centers: NDArray[np.float64]
    inertia: float
    n_iter: int
    history: tuple[float, ...]
    restart: int


def _relabel(labels: Labeling, centers: NDArray[np.float64]) -> tuple[Labeling, NDArray[np.float64]]:
    d = centers.shape[0]
    first = np.full(d, labels.shape[0], dtype=np.int64)
    np.minimum.at(first, labels, np.arange(labels.shape[0]))
    old_for_new = np.argsort(first, kind="stable")
    new_for_old = np.empty(d, dtype=np.int64)
    new_for_old[old_for_new] = np.arange(d)
    return new_for_old[labels], centers[old_for_new]


def _init_centers(Y: NDArray[np.float64], d: int, rng: np.random.Generator, method: str) -> NDArray[np.float64]:
    n = Y.shape[0]
    if method == "random":
        return Y[rng.choice(n, size=d, replace=False)].copy()

    centers = np.empty((d, Y.shape[1]), dtype=np.float64)
    centers[0] = Y[rng.integers(n)]
    closest = cdist(Y, centers[:1], metric="sqeuclidean")[:, 0]
    for c in range(1, d):
        total = float(closest.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            idx = int(rng.integers(n))
        centers[c] = Y[idx]
        closest = np.minimum(closest, cdist(Y, centers[c : c + 1], metric="sqeuclidean")[:, 0])
    return centers


def _repair_empty(dist: NDArray[np.float64], labels: Labeling, d: int) -> Labeling:
    """Give every empty cluster the point farthest from its current centroid."""
    labels = labels.copy()
    counts = np.bincount(labels, minlength=d)
    for empty in np.flatnonzero(counts == 0):
        own = dist[np.arange(labels.shape[0]), labels]
        movable = counts[labels] > 1
        if not np.any(movable):
            break
        candidates = np.where(movable, own, -np.inf)
        i = int(np.argmax(candidates))
        counts[labels[i]] -= 1
        labels[i] = empty
        counts[empty] += 1
    return labels


def _centroids(Y: NDArray[np.float64], labels: Labeling, d: int) -> NDArray[np.float64]:
    counts = np.bincount(labels, minlength=d).astype(np.float64)
    sums = np.zeros((d, Y.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, Y)
    return sums / counts[:, None]


def _lloyd(Y: NDArray[np.float64], cfg: KMeansConfig, rng: np.random.Generator, restart: int) -> KMeansResult:
    d = cfg.d
    centers = _init_centers(Y, d, rng, cfg.init)
    history: list[float] = []
    labels = np.zeros(Y.shape[0], dtype=np.int64)
    n_iter = 0
    for n_iter in range(1, cfg.max_iter + 1):
        dist = cdist(Y, centers, metric="sqeuclidean")
        labels = _repair_empty(dist, dist.argmin(axis=1).astype(np.int64), d)
        centers = _centroids(Y, labels, d)
        inertia = float(((Y - centers[labels]) ** 2).sum())
        history.append(inertia)
        if len(history) > 1:
            prev = history[-2]
            if prev - inertia <= cfg.tol * prev:
                break
    return KMeansResult(
        labels=labels,
        centers=centers,
        inertia=history[-1],
        n_iter=n_iter,
        history=tuple(history),
        restart=restart,
    )


def kmeans_run(Y: ArrayLike, cfg: KMeansConfig) -> KMeansResult:
    """Best-of-restarts k-means; the lowest restart index wins objective ties."""
    A = np.asarray(Y, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2 or not np.all(np.isfinite(A)):
        raise InputError("k-means input must be a finite 2-D matrix")
    if A.shape[0] < cfg.d:
        raise ParameterError(f"cannot form {cfg.d} clusters from {A.shape[0]} points")

    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    best: KMeansResult | None = None
    for restart, child in enumerate(children):
        result = _lloyd(A, cfg, np.random.default_rng(child), restart)
        if best is None or result.inertia < best.inertia:
            best = result
    assert best is not None
    logger.debug(
        f"kmeans n={A.shape[0]} d={cfg.d} best_restart={best.restart} "
        f"inertia={best.inertia:.6g} iters={best.n_iter}"
    )
    labels, centers = _relabel(best.labels, best.centers)
    return KMeansResult(
        labels=labels,
        centers=centers,
        inertia=best.inertia,
        n_iter=best.n_iter,
        history=best.history,
        restart=best.restart,
    )


def kmeans_fit(Y: ArrayLike, cfg: KMeansConfig) -> Labeling:
    return kmeans_run(Y, cfg).labels

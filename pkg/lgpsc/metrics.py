"""NMI and ARI on top of a shared contingency table."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from .errors import InputError

NmiNormalizer = Literal["geometric", "arithmetic"]


@dataclass(frozen=True)
class ContingencyTable:
    counts: NDArray[np.int64]
    row_labels: NDArray
    col_labels: NDArray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def row_marginals(self) -> NDArray[np.int64]:
        return self.counts.sum(axis=1)

    @property
    def col_marginals(self) -> NDArray[np.int64]:
        return self.counts.sum(axis=0)


def _pair(a: ArrayLike, b: ArrayLike) -> tuple[NDArray, NDArray]:
    x = np.asarray(a).ravel()
    y = np.asarray(b).ravel()
    if x.shape[0] != y.shape[0]:
        raise InputError(f"labelings differ in length: {x.shape[0]} != {y.shape[0]}")
    return x, y


def _codes(x: NDArray) -> NDArray[np.int64]:
    """Label ids renumbered by first appearance."""
    _uniq, first, inverse = np.unique(x, return_index=True, return_inverse=True)
    rank = np.empty(first.shape[0], dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.shape[0])
    return rank[inverse.ravel()]


def _ordered_codes(a: ArrayLike, b: ArrayLike) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    # Canonical codes in a canonical argument order make both metrics exactly
    # symmetric and exactly invariant to relabeling.
    x, y = _pair(a, b)
    cx, cy = _codes(x), _codes(y)
    diff = np.flatnonzero(cx != cy)
    if diff.size and cx[diff[0]] > cy[diff[0]]:
        cx, cy = cy, cx
    return cx, cy


def contingency(a: ArrayLike, b: ArrayLike) -> ContingencyTable:
    x, y = _pair(a, b)
    counts = contingency_matrix(x, y, sparse=False).astype(np.int64)
    return ContingencyTable(counts=counts, row_labels=np.unique(x), col_labels=np.unique(y))


def nmi(a: ArrayLike, b: ArrayLike, *, normalizer: NmiNormalizer = "geometric") -> float:
    """Normalized mutual information, natural-log entropies.

    Identical constant labelings score 1; a constant labeling against a
    non-constant one scores 0.
    """
    x, y = _ordered_codes(a, b)
    if x.shape[0] == 0:
        raise InputError("labelings must be non-empty")
    if np.array_equal(x, y):
        return 1.0
    x_const, y_const = x.max() == 0, y.max() == 0
    if x_const or y_const:
        return 0.0
    value = float(normalized_mutual_info_score(x, y, average_method=normalizer))
    return min(1.0, max(0.0, value))


def ari(a: ArrayLike, b: ArrayLike) -> float:
    x, y = _ordered_codes(a, b)
    if x.shape[0] < 2:
        raise InputError("ARI needs at least two points")
    return float(adjusted_rand_score(x, y))

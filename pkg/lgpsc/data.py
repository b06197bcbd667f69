"""Dataset ingestion and synthetic generators.

Delimited files hold one point per line with a designated label column.
Integer labels are renumbered in sorted order; string labels by first
appearance. The bundled Iris/Wine/Digits come from scikit-learn's loaders.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from sklearn import datasets as sk_datasets

from .errors import DatasetError, ParameterError
from .graph import DataMatrix
from .kmeans import Labeling

logger = logging.getLogger(__name__)

LAST: Literal["last"] = "last"
LabelColumn = int | Literal["last"]

BUILTIN_DATASETS = ("iris", "wine", "digits")
GENERATORS = ("moons", "blobs")


@dataclass(frozen=True)
class LabeledDataset:
    X: DataMatrix
    labels: Labeling
    name: str

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] != self.labels.shape[0]:
            raise DatasetError(
                f"dataset '{self.name}': {self.labels.shape[0]} labels for {self.X.shape[0]} points"
            )
        if self.d_true < 2:
            raise DatasetError(f"dataset '{self.name}' needs at least 2 distinct labels")

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def m(self) -> int:
        return int(self.X.shape[1])

    @property
    def d_true(self) -> int:
        return int(np.unique(self.labels).shape[0])


def _encode_labels(raw: Sequence[str]) -> Labeling:
    try:
        as_int = [int(v) for v in raw]
    except ValueError:
        as_int = None
    if as_int is not None:
        _uniq, inverse = np.unique(np.asarray(as_int, dtype=np.int64), return_inverse=True)
        return inverse.ravel().astype(np.int64)
    ids: dict[str, int] = {}
    return np.asarray([ids.setdefault(v, len(ids)) for v in raw], dtype=np.int64)


def load_delimited(
    path: str | os.PathLike[str],
    label_column: LabelColumn = LAST,
    delimiter: str = ",",
    has_header: bool = False,
    *,
    name: str | None = None,
) -> LabeledDataset:
    """Read a delimiter-separated file; the label column becomes the ground truth."""
    p = Path(path)
    try:
        fh = open(p, newline="", encoding="utf-8")
    except OSError as e:
        raise DatasetError(f"cannot open: {e.strerror or e}", path=str(p)) from e

    rows: list[list[float]] = []
    raw_labels: list[str] = []
    width: int | None = None
    label_idx: int | None = None
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, fields in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not fields or all(not f.strip() for f in fields):
                continue
            if width is None:
                width = len(fields)
                if width < 2:
                    raise DatasetError("need at least one feature and a label", path=str(p), line=lineno)
                label_idx = width - 1 if label_column == LAST else int(label_column)
                if label_idx < 0:
                    label_idx += width
                if not 0 <= label_idx < width:
                    raise DatasetError(f"label column {label_column} out of range", path=str(p), line=lineno)
            elif len(fields) != width:
                raise DatasetError(
                    f"ragged row: expected {width} fields, got {len(fields)}", path=str(p), line=lineno
                )
            assert label_idx is not None
            feats: list[float] = []
            for j, field in enumerate(fields):
                if j == label_idx:
                    continue
                try:
                    value = float(field)
                except ValueError:
                    raise DatasetError(f"cannot parse {field!r} as a number", path=str(p), line=lineno) from None
                if not math.isfinite(value):
                    raise DatasetError(f"non-finite value {field!r}", path=str(p), line=lineno)
                feats.append(value)
            rows.append(feats)
            raw_labels.append(fields[label_idx].strip())

    if len(rows) < 2:
        raise DatasetError(f"need at least 2 data rows, got {len(rows)}", path=str(p))
    X = np.asarray(rows, dtype=np.float64)
    logger.info(f"loaded {p}: n={X.shape[0]} m={X.shape[1]}")
    return LabeledDataset(X=X, labels=_encode_labels(raw_labels), name=name or p.stem)


def save_delimited(
    dataset: LabeledDataset,
    path: str | os.PathLike[str],
    delimiter: str = ",",
    has_header: bool = True,
):
    """Write features followed by the label in the last column."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        if has_header:
            writer.writerow([f"x{j}" for j in range(dataset.m)] + ["label"])
        for row, label in zip(dataset.X, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def load_builtin(name: str) -> LabeledDataset:
    loaders = {
        "iris": sk_datasets.load_iris,
        "wine": sk_datasets.load_wine,
        "digits": sk_datasets.load_digits,
    }
    key = name.strip().lower()
    if key not in loaders:
        raise DatasetError(f"unknown built-in dataset {name!r}; choose from {', '.join(BUILTIN_DATASETS)}")
    bunch = loaders[key]()
    return LabeledDataset(
        X=np.asarray(bunch.data, dtype=np.float64),
        labels=np.asarray(bunch.target, dtype=np.int64),
        name=key,
    )


def gen_two_moons(n: int, noise: float = 0.05, seed: int = 0) -> LabeledDataset:
    """Two interleaved unit half-circles with n/2 points each."""
    if n < 4 or n % 2:
        raise ParameterError(f"two moons needs an even n >= 4, got {n}")
    if noise < 0:
        raise ParameterError(f"noise must be nonnegative, got {noise}")
    X, y = sk_datasets.make_moons(n_samples=n, shuffle=False, noise=noise or None, random_state=seed)
    return LabeledDataset(X=np.asarray(X, dtype=np.float64), labels=np.asarray(y, dtype=np.int64), name="moons")


def gen_blobs(
    centers: ArrayLike,
    points_per: int,
    stddev: float = 1.0,
    seed: int = 0,
) -> LabeledDataset:
    C = np.asarray(centers, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] < 2:
        raise ParameterError(f"blobs need at least 2 centers as an array of vectors, got shape {C.shape}")
    if points_per < 1:
        raise ParameterError(f"points_per must be positive, got {points_per}")
    if stddev <= 0:
        raise ParameterError(f"stddev must be positive, got {stddev}")
    X, y = sk_datasets.make_blobs(
        n_samples=[points_per] * C.shape[0],
        centers=C,
        cluster_std=stddev,
        shuffle=False,
        random_state=seed,
    )
    return LabeledDataset(X=np.asarray(X, dtype=np.float64), labels=np.asarray(y, dtype=np.int64), name="blobs")


def parse_centers(text: str) -> NDArray[np.float64]:
    """'0,0;10,0;0,10' -> 3x2 array."""
    try:
        rows = [[float(v) for v in part.split(",")] for part in text.split(";") if part.strip()]
        return np.asarray(rows, dtype=np.float64)
    except ValueError:
        raise ParameterError(f"cannot parse centers {text!r}; expected 'x,y;x,y;...'") from None


def generate(generator: str, params: dict[str, Any]) -> LabeledDataset:
    key = generator.strip().lower()
    p = dict(params)
    try:
        if key == "moons":
            return gen_two_moons(int(p.pop("n", 200)), float(p.pop("noise", 0.05)), int(p.pop("seed", 0)))
        if key == "blobs":
            centers = p.pop("centers")
            if isinstance(centers, str):
                centers = parse_centers(centers)
            return gen_blobs(
                centers,
                int(p.pop("points_per", 50)),
                float(p.pop("stddev", 1.0)),
                int(p.pop("seed", 0)),
            )
    except KeyError as e:
        raise ParameterError(f"generator {generator!r} is missing parameter {e.args[0]!r}") from None
    finally:
        if key in GENERATORS and p:
            logger.warning(f"generator {generator!r} ignored parameters: {sorted(p)}")
    raise ParameterError(f"unknown generator {generator!r}; choose from {', '.join(GENERATORS)}")

"""Model and benchmark configuration.

All models forbid unknown keys and are frozen once validated.
"""

from __future__ import annotations

import itertools
import os
import sys
from pathlib import Path
from typing import Any, Literal

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import SpecError
from .graph import AUTO, Sigma, Symmetrization, parse_sigma
from .kmeans import KMeansConfig

MODEL_IDS = ("kmeans", "sc", "scpca", "multilevel", "cosine_sc")

_K_GRID = [5, 10, 15, 20]
_SIGMA_GRID: list[Sigma] = [AUTO, "auto/2", "auto*2"]

DEFAULT_GRIDS: dict[str, dict[str, list[Any]]] = {
    "kmeans": {},
    "sc": {"k": _K_GRID, "sigma": _SIGMA_GRID},
    "scpca": {"k": _K_GRID, "sigma": _SIGMA_GRID, "beta": [0.1, 0.3, 0.5, 0.7, 0.9]},
    # k_prime covers every k so each k_prime == k cell stays in the grid.
    "multilevel": {"k": _K_GRID, "sigma": _SIGMA_GRID, "k_prime": [1, *_K_GRID]},
    "cosine_sc": {},
}

# Parameters a grid may vary; everything else in ModelConfig is fixed per model.
GRID_KEYS = ("k", "k_prime", "sigma", "beta", "levels", "center_data", "raw_coarse_scale", "symmetrization")


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    d: int = Field(ge=1, description="Number of clusters.")
    k: int = Field(default=10, ge=1, description="kNN count of the point graph.")
    k_prime: int | None = Field(default=None, ge=1, description="kNN count of the mean-point graph; defaults to k.")
    sigma: Sigma = Field(default=AUTO, description="Kernel width: positive real, 'auto', 'auto/2', 'auto*2', ...")
    beta: float = Field(default=0.5, ge=0.0, le=1.0, description="SC-PCA weight of the Laplacian term.")
    levels: int = Field(default=1, ge=1, description="Multilevel coarsening depth.")
    center_data: bool = True
    raw_coarse_scale: bool = Field(
        default=False,
        description="Use H^T L' H without the 1/(k+1)^2 factor of the mean-point embedding.",
    )
    symmetrization: Symmetrization = "union"
    kmeans: KMeansConfig | None = None

    @field_validator("sigma")
    @classmethod
    def _check_sigma(cls, v: Sigma) -> Sigma:
        parse_sigma(v)
        return v

    @model_validator(mode="after")
    def _check_kmeans(self) -> ModelConfig:
        if self.kmeans is not None and self.kmeans.d != self.d:
            raise ValueError(f"kmeans.d={self.kmeans.d} does not match d={self.d}")
        return self

    @property
    def coarse_k(self) -> int:
        return self.k if self.k_prime is None else self.k_prime

    def kmeans_config(self) -> KMeansConfig:
        return self.kmeans if self.kmeans is not None else KMeansConfig(d=self.d)


def expand_grid(grid: dict[str, list[Any]]) -> list[dict[str, Any]]:
    """Cartesian product of the grid in declaration order; an empty grid is one cell."""
    keys = list(grid)
    return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]


def format_params(params: dict[str, Any]) -> str:
    parts = []
    for key, value in params.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        parts.append(f"{key}={text}")
    return ";".join(parts)


def _parse_scalar(text: str) -> Any:
    if text in ("true", "false"):
        return text == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_params(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for part in text.split(";"):
        if not part:
            continue
        key, _, value = part.partition("=")
        out[key] = _parse_scalar(value)
    return out


class DatasetSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str = Field(min_length=1)
    source: str = Field(min_length=1, description="File path, 'builtin:<name>' or 'gen:<generator>'.")
    params: dict[str, Any] = Field(default_factory=dict, description="Generator parameters.")
    label_column: int | Literal["last"] = "last"
    delimiter: str = Field(default=",", min_length=1, max_length=1)
    has_header: bool = False


class ModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    id: Literal["kmeans", "sc", "scpca", "multilevel", "cosine_sc"]
    grid: dict[str, list[Any]] | None = None
    fixed: dict[str, Any] = Field(default_factory=dict, description="Non-grid ModelConfig overrides.")

    @model_validator(mode="after")
    def _check_keys(self) -> ModelSpec:
        for key, values in (self.grid or {}).items():
            if key not in GRID_KEYS:
                raise ValueError(f"model {self.id}: '{key}' is not a grid parameter ({', '.join(GRID_KEYS)})")
            if not values:
                raise ValueError(f"model {self.id}: grid '{key}' is empty")
        for key in self.fixed:
            if key in ("d", "kmeans"):
                raise ValueError(f"model {self.id}: '{key}' is set by the harness")
        return self

    def cells(self) -> list[dict[str, Any]]:
        grid = DEFAULT_GRIDS[self.id] if self.grid is None else self.grid
        return expand_grid(grid)


class BenchmarkSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    datasets: list[DatasetSpec] = Field(min_length=1)
    models: list[ModelSpec] = Field(min_length=1)
    seed: int = Field(default=0, ge=0)
    repeats: int = Field(default=5, ge=1)
    restarts: int = Field(default=10, ge=1, description="k-means restarts per fit.")
    output_dir: str = "results"

    @model_validator(mode="after")
    def _check_cells(self) -> BenchmarkSpec:
        names = [ds.name for ds in self.datasets]
        if len(set(names)) != len(names):
            raise ValueError(f"dataset names must be unique: {names}")
        for model in self.models:
            for cell in model.cells():
                # d is only known after loading; 2 stands in for validation.
                try:
                    ModelConfig(d=2, **{**model.fixed, **cell})
                except ValidationError as e:
                    raise ValueError(f"model {model.id}, cell {format_params(cell)}: {e}") from None
        return self


def load_spec(path: str | os.PathLike[str], **overrides: Any) -> BenchmarkSpec:
    p = Path(path)
    try:
        raw = tomllib.loads(p.read_text(encoding="utf-8"))
    except OSError as e:
        raise SpecError(f"{p}: cannot read spec: {e.strerror or e}") from e
    except tomllib.TOMLDecodeError as e:
        raise SpecError(f"{p}: invalid TOML: {e}") from e
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return validate_spec(raw, origin=str(p))


def validate_spec(raw: dict[str, Any], *, origin: str = "<spec>") -> BenchmarkSpec:
    try:
        return BenchmarkSpec.model_validate(raw)
    except ValidationError as e:
        raise SpecError(f"{origin}: {e}") from e

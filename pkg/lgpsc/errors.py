"""Exception hierarchy.

All errors derive from ValueError so callers catching ValueError keep working.
"""

from __future__ import annotations


class LgpscError(ValueError):
    pass


class DimensionError(LgpscError):
    """Requested more eigenvectors/singular vectors than the matrix has."""


class InputError(LgpscError):
    """Malformed or non-finite numeric input."""


class ParameterError(LgpscError):
    """A parameter lies outside its domain (k, sigma, d, ...)."""


class DegenerateInputError(LgpscError):
    """Input is valid in shape but makes the model undefined (zero Gram, zero degree)."""


class DatasetError(LgpscError):
    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")


class SpecError(LgpscError):
    """Benchmark spec is invalid; raised before any fit runs."""

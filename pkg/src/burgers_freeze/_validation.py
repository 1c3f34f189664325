"""Input validation helpers shared by the estimator and the CLI."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .grid import Field, Grid


def check_scalar_range(value, name: str, *, lower=None, upper=None, lower_inclusive=False,
                       upper_inclusive=False) -> float:
    """Return ``value`` as float after checking it is a finite real in the given range."""
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    value = float(value)
    if lower is not None and (value < lower or (value == lower and not lower_inclusive)):
        raise ValueError(f"{name} must be {'>=' if lower_inclusive else '>'} {lower}, got {value}")
    if upper is not None and (value > upper or (value == upper and not upper_inclusive)):
        raise ValueError(f"{name} must be {'<=' if upper_inclusive else '<'} {upper}, got {value}")
    return value


def check_field(X, grid: Grid, name: str = "X") -> Field:
    """Coerce ``X`` (Field or array of cell values) to a finite Field on ``grid``."""
    if isinstance(X, Field):
        if X.grid != grid:
            raise ValueError(f"{name} lives on a different grid")
        values = X.values
    else:
        values = X
    arr = check_array(values, ensure_2d=False, allow_nd=True, dtype=np.float64,
                      ensure_all_finite=True, input_name=name)
    if arr.shape != grid.shape:
        if arr.size != int(np.prod(grid.shape)):
            raise ValueError(f"{name} has shape {arr.shape}, expected {grid.shape}")
        arr = arr.reshape(grid.shape)
    return Field(grid, arr.copy())


def check_points(points, d: int, name: str = "points") -> np.ndarray:
    """Coerce evaluation points to an ``(N, d)`` float array; 1d accepts a flat array."""
    arr = np.asarray(points, dtype=float)
    if d == 1 and arr.ndim <= 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, ensure_2d=True, dtype=np.float64, ensure_all_finite=True, input_name=name,
                      ensure_min_samples=1)
    if arr.shape[1] != d:
        raise ValueError(f"{name} must have {d} columns, got {arr.shape[1]}")
    return arr

"""Input validation for the estimator layer."""

from __future__ import annotations

import numpy as np

from .grid import Grid, GridFunction

_MODES = ("all", "dyadic", "sampled")


def check_grid_array(X, dim: int | None = None, min_points: int = 1) -> np.ndarray:
    """Return ``X`` as a finite float array of 1 or 2 dimensions.

    A GridFunction is unwrapped; ``dim`` pins the expected number of axes.
    """
    if isinstance(X, GridFunction):
        X = X.values
    arr = np.asarray(X, dtype=float)
    if arr.ndim not in (1, 2):
        raise ValueError(f"expected a 1D or 2D grid array, got shape {arr.shape}")
    if dim is not None and arr.ndim != dim:
        raise ValueError(f"expected a {dim}D grid array, got {arr.ndim}D")
    if min(arr.shape) < min_points:
        raise ValueError(f"need at least {min_points} points per axis, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("grid values must be finite")
    return arr


def check_grid_function(X, spacing: float = 1.0, origin: float = 0.0) -> GridFunction:
    if isinstance(X, GridFunction):
        return X
    arr = check_grid_array(X)
    return GridFunction(Grid(arr.ndim, arr.shape, spacing, origin), arr)


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    if a.shape != b.shape:
        raise ValueError(f"{what} differ in shape: {a.shape} vs {b.shape}")


def check_family_mode(mode: str) -> str:
    if mode not in _MODES:
        raise ValueError(f"family must be one of {_MODES}, got {mode!r}")
    return mode

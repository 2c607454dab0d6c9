"""Input validation helpers shared by the estimators and the functional API."""
from __future__ import annotations

import numbers

import numpy as np

from .core import DEFAULT_GRID, GridFunction, PositionGrid, QuantumState


def check_scalar(value, name, *, min_val=None, max_val=None, include_min=True,
                 target_type=numbers.Real):
    """Validate a scalar parameter and return it as float/int."""
    if isinstance(value, bool) or not isinstance(value, target_type):
        raise TypeError(f"{name} must be {target_type.__name__}, got {type(value).__name__}")
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if min_val is not None:
        if include_min and value < min_val:
            raise ValueError(f"{name} must be >= {min_val}, got {value!r}")
        if not include_min and value <= min_val:
            raise ValueError(f"{name} must be > {min_val}, got {value!r}")
    if max_val is not None and value > max_val:
        raise ValueError(f"{name} must be <= {max_val}, got {value!r}")
    return value


def check_grid_function(values, grid: PositionGrid | None = None) -> GridFunction:
    """Accept a GridFunction or raw samples (on ``grid`` or the default grid)."""
    if isinstance(values, GridFunction):
        if grid is not None and values.grid != grid:
            raise ValueError("grid function lives on a different grid")
        return values
    grid = DEFAULT_GRID if grid is None else grid
    return GridFunction(grid, np.asarray(values, dtype=complex))


def check_nonzero(fn: GridFunction, name="target") -> GridFunction:
    if fn.norm() == 0:
        raise ValueError(f"{name} is identically zero")
    return fn


def check_state(state) -> QuantumState:
    if isinstance(state, QuantumState):
        return state
    return QuantumState(np.asarray(state, dtype=complex))


def check_same_grid(a: PositionGrid, b: PositionGrid, what="grids"):
    if a != b:
        raise ValueError(f"{what} do not match: {a} vs {b}")

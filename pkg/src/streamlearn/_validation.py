"""Small input-validation helpers shared by the estimators and primitives."""

import numpy as np

from .exceptions import InvalidInputError


def as_vector(x, name="x"):
    """Coerce to a finite 1-D float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def as_square_matrix(m, name="m"):
    """Coerce to a finite square 2-D float array."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def as_matrix(m, name="X"):
    """Coerce to a finite 2-D float array (rows = samples)."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def check_length(x, n, name="x"):
    if len(x) != n:
        raise InvalidInputError(f"{name} has length {len(x)}, expected {n}")


def check_binary_label(y):
    """Accept 0/1 (or bool) scalar labels only."""
    val = float(y)
    if val not in (0.0, 1.0):
        raise InvalidInputError(f"label must be 0 or 1, got {y!r}")
    return int(val)

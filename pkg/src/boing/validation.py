"""Input validation helpers shared by the estimators and optimizers."""

from __future__ import annotations

import numpy as np


def check_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Return a numpy Generator for `seed`.

    Accepts None (fresh entropy), an int seed, or an existing Generator
    (returned as-is, so callers can share a stream).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (int, np.integer)):
        return np.random.default_rng(seed)
    raise TypeError(f"seed must be None, int, or Generator, got {type(seed).__name__}")


def as_float_2d(X, name: str = "X") -> np.ndarray:
    """Coerce to a C-contiguous float64 (n, d) array, rejecting non-finite values."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def as_float_1d(y, name: str = "y") -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite values")
    return y


def check_consistent_rows(X: np.ndarray, y: np.ndarray) -> None:
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")


def check_positive_int(value: int, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or value <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)

"""Input validation helpers shared by the estimator-facing modules."""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError, DataError, NumericError


def check_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array and reject non-finite rows by index."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ArgumentError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ArgumentError(f"{name} has no rows")
    finite = np.isfinite(X).all(axis=1)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise DataError(f"{name} row {bad} contains non-finite values")
    return X


def check_finite_result(arr: np.ndarray, what: str) -> np.ndarray:
    if not np.isfinite(arr).all():
        raise NumericError(f"{what} produced non-finite values")
    return arr


def check_k(k: int, n: int) -> int:
    k = int(k)
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if k >= n:
        raise ArgumentError(f"k must be < number of points ({n}), got {k}")
    return k


def check_seed(seed) -> int:
    """Normalize to the non-negative 31-bit range both RNG backends accept."""
    if seed is None:
        return 0
    return int(seed) % (2**31)

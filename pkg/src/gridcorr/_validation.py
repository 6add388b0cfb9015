"""Input validation helpers used by the functional core and the estimators."""

from __future__ import annotations

import numpy as np

from .exceptions import GridcorrError

SYMMETRY_TOL = 1e-12


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise GridcorrError(f"{name} must be a 2-d array, got ndim={X.ndim}")
    if not np.isfinite(X).all():
        raise GridcorrError(f"{name} contains non-finite entries")
    return X


def check_square(M, name: str = "matrix") -> np.ndarray:
    M = as_float_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise GridcorrError(f"{name} must be square, got shape {M.shape}")
    return M


def check_symmetric(M, name: str = "matrix", tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate symmetry within ``tol`` and return the symmetrized matrix."""
    M = check_square(M, name)
    gap = np.abs(M - M.T).max() if M.size else 0.0
    if gap > tol:
        raise GridcorrError(f"{name} is not symmetric (max asymmetry {gap:.3e})")
    return (M + M.T) / 2.0


def clip_correlations(M: np.ndarray, slack: float = 1e-9):
    """Clip entries to [-1, 1]; return the clipped matrix and the clamp count.

    Values inside the interval by less than ``slack`` are treated as rounding
    noise and not counted.
    """
    outside = int(((M > 1.0 + slack) | (M < -1.0 - slack)).sum())
    return np.clip(M, -1.0, 1.0), outside


def check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise GridcorrError(f"seed must be an integer, got {seed!r}")
    return int(seed)

"""Input checks shared by the estimator classes."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .model import DesignSpace


def check_design_space(X, ids=None) -> DesignSpace:
    """Coerce X into a DesignSpace.

    Accepted: a DesignSpace (returned as is), an (n, m) array of regressors
    f(x), or an (n, m, m) stack of symmetric PSD elementary matrices.
    """
    if isinstance(X, DesignSpace):
        return X
    X = check_array(X, allow_nd=True, ensure_min_samples=1, dtype=np.float64)
    if X.ndim == 2:
        return DesignSpace.from_regressors(X, ids=ids)
    if X.ndim == 3 and X.shape[1] == X.shape[2]:
        return DesignSpace.from_matrices(X, ids=ids)
    raise ValueError(f"expected (n, m) regressors or (n, m, m) matrices, got shape {X.shape}")


def check_reference_weights(sample_weight, n: int) -> np.ndarray:
    """Nonnegative weights of length n, rescaled to sum to one (uniform if None)."""
    if sample_weight is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(sample_weight, dtype=float).ravel()
    if w.shape != (n,):
        raise ValueError(f"sample_weight has shape {w.shape}, expected ({n},)")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("sample_weight must be finite and nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("sample_weight sums to zero")
    return w / total


def n_points(X) -> int:
    return len(X) if isinstance(X, DesignSpace) else np.shape(X)[0]

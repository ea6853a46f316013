"""Input validation helpers shared across the package."""

import numpy as np


def check_dataset(data) -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array of points, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected at least one row and one column, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input contains non-finite values")
    return arr


def check_landmarks(landmarks, dim: int) -> np.ndarray:
    """Coerce landmarks to (n, dim) float64; duplicates are allowed."""
    arr = check_dataset(landmarks)
    if arr.shape[1] != dim:
        raise ValueError(
            f"landmark dimension {arr.shape[1]} does not match data dimension {dim}"
        )
    return arr


def check_batch(batch, n_points: int) -> np.ndarray:
    arr = np.asarray(batch, dtype=int)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("batch must be a non-empty 1-D index array")
    if arr.min() < 0 or arr.max() >= n_points:
        raise ValueError(f"batch index out of range for N={n_points}")
    return arr

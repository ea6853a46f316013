"""Stochastic estimators of the discrepancy gradient.

Only the data sums T1 and T2 depend on the dataset, so they are the only
quantities estimated: a batch of b i.i.d. uniform indices (with
replacement) yields the unbiased scaled sums

    T1_hat = (N / b) * sum over landmarks and batch of K^2(s_i, x_j),
    T2_hat[k, l] = (N / b) * sum over batch of left partials at (s_k, x_j).

The one-sample gradient reuses a single batch for both factors; cheap, but
biased because T1_hat enters squared.  The two-sample gradient multiplies
estimates from two independent batches and is exactly unbiased.  The
landmark-only quantities (||K_S||_F^2 and the derivative bracket) are
always evaluated exactly; they cost O(n^2 d), independent of N.
"""

import numpy as np

from ._validation import check_batch, check_dataset, check_landmarks
from .discrepancy import _landmark_bracket

__all__ = [
    "draw_batch",
    "t1_hat",
    "t2_hat",
    "one_sample_gradient",
    "two_sample_gradient",
]


def draw_batch(n_points: int, b: int, rng: np.random.Generator) -> np.ndarray:
    """Draw b i.i.d. uniform indices in [0, n_points), advancing rng."""
    if n_points < 1 or b < 1:
        raise ValueError(f"need n_points >= 1 and b >= 1, got {n_points}, {b}")
    return rng.integers(0, n_points, size=b)


def t1_hat(data, sample, batch, kernel) -> float:
    """Batch estimate of T1; exact when the batch enumerates the data once."""
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    batch = check_batch(batch, X.shape[0])
    scale = X.shape[0] / batch.size
    return scale * float(kernel.k2_cross(S, X[batch]).sum())


def t2_hat(data, sample, batch, k: int, l: int, kernel) -> float:
    """Batch estimate of T2[k, l] (0-based landmark and coordinate)."""
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    batch = check_batch(batch, X.shape[0])
    n, d = S.shape
    if not 0 <= k < n:
        raise ValueError(f"landmark index {k} out of range for n={n}")
    if not 0 <= l < d:
        raise ValueError(f"coordinate index {l} out of range for d={d}")
    scale = X.shape[0] / batch.size
    grads = kernel.k2_grad_left_cross(S[k : k + 1], X[batch])
    return scale * float(grads[0, :, l].sum())


def _batch_sums(S, X, batch, kernel):
    scale = X.shape[0] / batch.size
    block = X[batch]
    t1 = scale * float(kernel.k2_cross(S, block).sum())
    t2 = scale * kernel.k2_grad_left_cross(S, block).sum(axis=1)
    return t1, t2


def one_sample_gradient(data, sample, batch, kernel, ks_frob_sq: float | None = None) -> np.ndarray:
    """Single-batch gradient estimate, shape (n, d); biased in general.

    ``ks_frob_sq`` may carry the current exact ||K_S||_F^2; it is
    recomputed from the sample when omitted.
    """
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    batch = check_batch(batch, X.shape[0])
    ks2, ups = _landmark_bracket(S, kernel)
    if ks_frob_sq is not None:
        ks2 = float(ks_frob_sq)
    if ks2 == 0.0:
        return np.zeros_like(S)
    t1, t2 = _batch_sums(S, X, batch, kernel)
    return (t1 * t1 / ks2**2) * ups - (2.0 * t1 / ks2) * t2


def two_sample_gradient(
    data, sample, batch_x, batch_y, kernel, ks_frob_sq: float | None = None
) -> np.ndarray:
    """Two-batch gradient estimate, shape (n, d); unbiased.

    T1 is estimated on both batches, T2 only on the second; the products
    of estimates from independent batches have the exact expectations.
    """
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    batch_x = check_batch(batch_x, X.shape[0])
    batch_y = check_batch(batch_y, X.shape[0])
    ks2, ups = _landmark_bracket(S, kernel)
    if ks_frob_sq is not None:
        ks2 = float(ks_frob_sq)
    if ks2 == 0.0:
        return np.zeros_like(S)
    t1_x, _ = _batch_sums(S, X, batch_x, kernel)
    t1_y, t2_y = _batch_sums(S, X, batch_y, kernel)
    return (t1_x * t1_y / ks2**2) * ups - (2.0 * t1_x / ks2) * t2_y

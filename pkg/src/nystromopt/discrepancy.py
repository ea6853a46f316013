"""Squared-kernel discrepancy: value, exact gradient, Hessian, Lipschitz bound.

For a dataset D = {x_1..x_N} and a landmark multiset S = {s_1..s_n}, the
discrepancy is

    R(S) = ||K||_F^2 - T1(S)^2 / ||K_S||_F^2,      T1 = sum_ij K^2(s_j, x_i),

with ||K_S||_F^2 the squared Frobenius norm of the landmark kernel matrix,
and R(S) = ||K||_F^2 when ||K_S||_F = 0.  R upper-bounds the squared
Frobenius error of the Nystrom approximation built from S, so driving it
down by gradient descent improves the approximation without ever forming
or pseudo-inverting kernel matrices.

The partial derivative of R in coordinate l of landmark k is

    (T1^2 / ||K_S||_F^4) * Ups[k, l] - (2 T1 / ||K_S||_F^2) * T2[k, l],

where Ups[k, l] collects the landmark-only derivative bracket (diagonal
term plus twice the sum of left partials towards the other landmarks) and
T2[k, l] sums the left partials towards the data.  ||K||_F^2 does not
depend on S: evaluate it once per dataset with kernel_frobenius_sq and
pass it back in, the descent loop never needs to recompute it.

Gradients are returned as (n, d) arrays; ravel() gives the landmark-major
flat layout that the (n*d, n*d) Hessian rows and columns follow.  All
reductions run in a fixed blocked order, so results are deterministic.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_dataset, check_landmarks
from .kernels import SquaredKernelBounds

__all__ = [
    "SkdTerms",
    "LipschitzBounds",
    "kernel_frobenius_sq",
    "skd_terms",
    "skd_value",
    "skd_gradient",
    "skd_hessian",
    "lipschitz_bounds",
]

# cap on elements of the (n, block, d) intermediates in data reductions;
# small enough that the per-block working set stays cache-friendly at any N
_BLOCK_ELEMENTS = 262_144


@dataclass(frozen=True)
class SkdTerms:
    """The S-dependent and S-independent sums entering the discrepancy.

    cross_sum is T1; c_s = T1 / ||K_S||_F^2 (0 if the landmark norm
    vanishes), the quantity whose bound C0 drives the Lipschitz analysis.
    """

    k_frob_sq_data: float
    k_frob_sq_landmarks: float
    cross_sum: float
    c_s: float


@dataclass(frozen=True)
class LipschitzBounds:
    """Constants bounding the discrepancy Hessian uniformly over samples."""

    c0: float
    c1: float
    l_const: float


def _row_blocks(n_rows: int, per_row: int):
    block = max(1, _BLOCK_ELEMENTS // max(per_row, 1))
    for start in range(0, n_rows, block):
        yield slice(start, min(start + block, n_rows))


def kernel_frobenius_sq(data, kernel) -> float:
    """Squared Frobenius norm of the data kernel matrix, sum_ij K^2(x_i, x_j).

    O(N^2) time but O(N) memory (blocked); compute once per dataset.
    """
    X = check_dataset(data)
    n_rows, dim = X.shape
    total = 0.0
    for rows in _row_blocks(n_rows, n_rows * dim):
        total += float(kernel.k2_cross(X[rows], X).sum())
    return total


def _landmark_bracket(S, kernel):
    """||K_S||_F^2 and the per-coordinate landmark bracket Ups (n, d)."""
    k2_land = kernel.k2_cross(S, S)
    ks2 = float(k2_land.sum())
    grads = kernel.k2_grad_left_cross(S, S)
    idx = np.arange(S.shape[0])
    grads[idx, idx, :] = 0.0  # the bracket sums over the *other* landmarks
    ups = kernel.k2_grad_diag(S) + 2.0 * grads.sum(axis=1)
    return ks2, ups


def _data_sums(S, X, kernel, with_hessian: bool = False):
    """T1, T2 and (optionally) the summed left/left second partials."""
    n, d = S.shape
    t1 = 0.0
    t2 = np.zeros((n, d))
    hess = np.zeros((n, d, d)) if with_hessian else None
    for rows in _row_blocks(X.shape[0], n * d):
        block = X[rows]
        t1 += float(kernel.k2_cross(S, block).sum())
        t2 += kernel.k2_grad_left_cross(S, block).sum(axis=1)
        if with_hessian:
            hess += kernel.k2_hess_left_left_cross(S, block).sum(axis=1)
    return t1, t2, hess


def skd_terms(data, sample, kernel, k_frob_sq: float | None = None) -> SkdTerms:
    """Evaluate all sums entering the discrepancy at the given sample.

    Pass a cached ``k_frob_sq`` to skip the O(N^2) data term.
    """
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    if k_frob_sq is None:
        k_frob_sq = kernel_frobenius_sq(X, kernel)
    ks2 = float(kernel.k2_cross(S, S).sum())
    t1, _, _ = _data_sums(S, X, kernel)
    c_s = t1 / ks2 if ks2 > 0.0 else 0.0
    return SkdTerms(
        k_frob_sq_data=float(k_frob_sq),
        k_frob_sq_landmarks=ks2,
        cross_sum=t1,
        c_s=c_s,
    )


def _projection_sq(X, S, kernel) -> float:
    """T1^2 / ||K_S||_F^2, the part of R that depends on the sample."""
    ks2 = float(kernel.k2_cross(S, S).sum())
    if ks2 == 0.0:
        return 0.0
    t1, _, _ = _data_sums(S, X, kernel)
    return t1 * t1 / ks2


def skd_value(data, sample, kernel, k_frob_sq: float | None = None) -> float:
    """The discrepancy R(S); lies in [0, ||K||_F^2].

    Returns ||K||_F^2 when the landmark kernel norm vanishes (impossible
    for kernels with unit diagonal, kept for generality).  Tiny negative
    roundoff is clamped to 0.
    """
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    if k_frob_sq is None:
        k_frob_sq = kernel_frobenius_sq(X, kernel)
    return max(float(k_frob_sq) - _projection_sq(X, S, kernel), 0.0)


def skd_gradient(data, sample, kernel) -> np.ndarray:
    """Exact gradient of R at the sample, shape (n, d).

    Cost O(n^2 d + n N d); independent of ||K||_F^2.  At samples with
    vanishing landmark kernel norm R is flat by convention and the zero
    vector is returned.
    """
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    ks2, ups = _landmark_bracket(S, kernel)
    if ks2 == 0.0:
        return np.zeros_like(S)
    t1, t2, _ = _data_sums(S, X, kernel)
    return (t1 * t1 / ks2**2) * ups - (2.0 * t1 / ks2) * t2


def skd_hessian(data, sample, kernel) -> np.ndarray:
    """Dense (n*d, n*d) Hessian of R at the sample, for diagnostic use.

    Assembled blockwise from the second partials of the squared kernel and
    the derivative of c_S = T1 / ||K_S||_F^2; rows and columns follow the
    landmark-major layout of skd_gradient().ravel().
    """
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    n, d = S.shape
    k2_land = kernel.k2_cross(S, S)
    ks2 = float(k2_land.sum())
    if ks2 == 0.0:
        return np.zeros((n * d, n * d))

    idx = np.arange(n)
    grads_land = kernel.k2_grad_left_cross(S, S)
    grads_land[idx, idx, :] = 0.0
    p_land = grads_land.sum(axis=1)  # (n, d): sum_{j != k} of left partials
    grad_diag = kernel.k2_grad_diag(S)
    ups = grad_diag + 2.0 * p_land

    hess_ll_land = kernel.k2_hess_left_left_cross(S, S)
    hess_ll_land[idx, idx, :, :] = 0.0
    sum_hll_land = hess_ll_land.sum(axis=1)  # (n, d, d)
    hess_lr_land = kernel.k2_hess_left_right_cross(S, S)  # (n, n, d, d)
    hess_diag = kernel.k2_hess_diag(S)  # (n, d, d)

    t1, t2, hess_data = _data_sums(S, X, kernel, with_hessian=True)
    c = t1 / ks2
    dc = (t2 - c * ups) / ks2  # (n, d): partials of c_S

    # diagonal blocks, entry (l, l') of block k
    diag_blocks = (
        c * c * hess_diag
        + 2.0 * c * c * sum_hll_land
        - 2.0 * c * hess_data
        + (2.0 * c * grad_diag + 4.0 * c * p_land - 2.0 * t2)[:, :, None] * dc[:, None, :]
    )
    # off-diagonal blocks, entry (l, l') of block (k, k')
    factor = 2.0 * c * grad_diag + 4.0 * c * p_land - 2.0 * t2  # (n, d)
    hess = 2.0 * c * c * np.transpose(hess_lr_land, (0, 2, 1, 3))  # (n, d, n, d)
    hess += factor[:, :, None, None] * dc[None, None, :, :]
    hess[idx, :, idx, :] = diag_blocks
    return hess.reshape(n * d, n * d)


def lipschitz_bounds(
    n: int, n_points: int, dim: int, bounds: SquaredKernelBounds, k_frob: float
) -> LipschitzBounds:
    """Uniform Lipschitz constant of the discrepancy gradient.

    c0 bounds c_S, c1 bounds its partials, and l_const bounds the Frobenius
    (hence spectral) norm of the Hessian over all samples of size n, so any
    fixed stepsize <= 1 / l_const makes exact gradient descent converge.
    """
    if min(n, n_points, dim) < 1:
        raise ValueError("counts n, n_points and dim must all be >= 1")
    if bounds.alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {bounds.alpha}")
    if k_frob < 0.0:
        raise ValueError(f"k_frob must be nonnegative, got {k_frob}")
    m1, m2 = bounds.m1, bounds.m2
    c0 = k_frob / np.sqrt(n * bounds.alpha)
    c1 = m1 / (n * bounds.alpha) * (n_points + (2 * n - 1) * c0)
    same = (2 * n - 1) * c0**2 * m2 + (4 * n - 2) * c0 * c1 * m1 + 2 * n_points * (c0 * m2 + c1 * m1)
    diff = c0**2 * m2 + (2 * n - 1) * c0 * c1 * m1 + n_points * c1 * m1
    l_const = np.sqrt(n * dim**2 * same**2 + 4 * n * (n - 1) * dim**2 * diff**2)
    return LipschitzBounds(c0=float(c0), c1=float(c1), l_const=float(l_const))

"""Nystrom approximations, residual norms and approximation factors.

The approximation induced by a landmark multiset S is
K_hat = C W^+ C^T with C the data-to-landmark kernel matrix and W the
landmark kernel matrix; W^+ is a symmetric pseudoinverse where
eigenvalues below 1e-10 times the largest are zeroed, which makes
duplicated landmarks behave exactly like their single copy.

Residual quality is measured in trace, Frobenius and spectral norms, and
compared against the best possible rank-n approximation (spectral
truncation of K): the three ratios are the approximation factors, >= 1 and
ideal at 1.  Dense N x N computation throughout, except for the
diagonal-only trace path (nystrom_trace_error) which needs O(N n^2) time
and O(N n) memory only.
"""

import threading
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from ._validation import check_dataset, check_landmarks

__all__ = [
    "ApproximationReport",
    "nystrom_matrix",
    "nystrom_factor",
    "nystrom_from_columns",
    "nystrom_diag",
    "nystrom_trace_error",
    "residual_norms",
    "optimal_rank_n",
    "approximation_factors",
]

_PINV_CUTOFF = 1e-10
_DENSE_EIG_MAX = 2000
_ZERO_REL = 1e-8  # numerator/denominator below this (relative) count as zero


@dataclass(frozen=True)
class ApproximationReport:
    """Residual norms of K - K_hat(S) and their ratios to the rank-n optimum.

    rank_used is the numerical rank of the landmark kernel matrix actually
    used by the pseudoinverse (< n when landmarks coincide).  A factor of
    inf flags a residual that is genuinely worse than an exactly-recovered
    optimum; 0/0 cases report factor 1.
    """

    trace_err: float
    frob_err: float
    spec_err: float
    factor_tr: float
    factor_f: float
    factor_sp: float
    rank_used: int


def _psd_pinv_root(W):
    """U * lam^{-1/2} for the eigenpairs of W kept by the relative cutoff."""
    lam, U = np.linalg.eigh(W)
    lam_max = float(lam[-1]) if lam.size else 0.0
    keep = lam > _PINV_CUTOFF * max(lam_max, 0.0)
    return U[:, keep] / np.sqrt(lam[keep]), int(np.count_nonzero(keep))


def nystrom_factor(data, sample, kernel):
    """Low-rank factor B with K_hat = B B^T, plus the rank actually used."""
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    C = kernel.k_cross(X, S)
    root, rank = _psd_pinv_root(kernel.k_cross(S, S))
    return C @ root, rank


def nystrom_matrix(data, sample, kernel) -> np.ndarray:
    """Dense N x N Nystrom approximation of K; symmetric PSD by construction."""
    B, _ = nystrom_factor(data, sample, kernel)
    return B @ B.T


def nystrom_from_columns(data, indices, kernel) -> np.ndarray:
    """Nystrom approximation from a multiset of data column indices.

    Builds the full kernel matrix and applies C W^+ C^T on the selected
    columns; coincides with nystrom_matrix on the indexed points.
    """
    X = check_dataset(data)
    idx = np.asarray(indices, dtype=int)
    if idx.ndim != 1 or idx.size < 1:
        raise ValueError("indices must be a non-empty 1-D integer array")
    if idx.min() < 0 or idx.max() >= X.shape[0]:
        raise ValueError(f"column index out of range for N={X.shape[0]}")
    K = kernel.k_cross(X, X)
    C = K[:, idx]
    root, _ = _psd_pinv_root(K[np.ix_(idx, idx)])
    B = C @ root
    return B @ B.T


def nystrom_diag(data, sample, kernel) -> np.ndarray:
    """Diagonal of the Nystrom approximation in O(N n^2), no N x N matrix."""
    B, _ = nystrom_factor(data, sample, kernel)
    return np.einsum("ij,ij->i", B, B)


def nystrom_trace_error(data, sample, kernel) -> float:
    """trace(K - K_hat) via diagonals only; valid because the residual is PSD."""
    X = check_dataset(data)
    return float(kernel.k_diag(X).sum() - nystrom_diag(X, sample, kernel).sum())


# ARPACK is not re-entrant; serialise Lanczos calls across threads
_lanczos_lock = threading.Lock()


def _lanczos_lmax(matvec, n, tol=1e-10):
    op = LinearOperator((n, n), matvec=matvec, dtype=float)
    v0 = np.full(n, 1.0 / np.sqrt(n))
    with _lanczos_lock:
        vals = eigsh(op, k=1, which="LA", tol=tol, v0=v0, return_eigenvectors=False)
    return float(vals[0])


def residual_norms(data, approx, kernel):
    """Trace, Frobenius and spectral norms of K - approx.

    The trace norm is computed as trace(K - approx), which equals the true
    trace norm only when the residual is PSD, as it is for any Nystrom
    approximation of this data; inputs whose residual has an eigenvalue
    below -1e-6 * ||K||_2 are rejected.  The spectral norm uses a dense
    symmetric eigensolve for N <= 2000 and a Lanczos iteration above.
    """
    X = check_dataset(data)
    N = X.shape[0]
    A = np.asarray(approx, dtype=float)
    if A.shape != (N, N):
        raise ValueError(f"approx must be {N} x {N}, got {A.shape}")
    K = kernel.k_cross(X, X)
    R = K - A
    trace = float(np.trace(R))
    frob = float(np.linalg.norm(R, "fro"))
    if N <= _DENSE_EIG_MAX:
        eig_r = np.linalg.eigvalsh(R)
        spec = float(eig_r[-1])
        min_eig = float(eig_r[0])
        k_spec = float(np.linalg.eigvalsh(K)[-1])
    else:
        spec = _lanczos_lmax(lambda v: R @ v, N)
        min_eig = -_lanczos_lmax(lambda v: -(R @ v), N, tol=1e-6)
        k_spec = _lanczos_lmax(lambda v: K @ v, N, tol=1e-6)
    if min_eig < -1e-6 * k_spec:
        raise ValueError(
            f"residual has eigenvalue {min_eig:.3e} < -1e-6 * ||K||_2; "
            "approx is not a Nystrom-type approximation of this data"
        )
    return trace, frob, max(spec, 0.0)


def optimal_rank_n(data, n: int, kernel, eigenvalues=None):
    """Residual norms of the best rank-n approximation of K.

    Truncates the spectral expansion at the n largest eigenvalues; pass
    precomputed ``eigenvalues`` of K to skip the eigendecomposition.
    """
    X = check_dataset(data)
    N = X.shape[0]
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    if eigenvalues is None:
        eigenvalues = np.linalg.eigvalsh(kernel.k_cross(X, X))
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    tail = lam[n:]
    trace = float(tail.sum())
    frob = float(np.sqrt((tail**2).sum()))
    spec = float(tail[0]) if tail.size else 0.0
    return trace, frob, spec


def _factor(numer, denom, scale):
    thresh = _ZERO_REL * scale
    if denom > thresh:
        return numer / denom
    if numer <= thresh:
        return 1.0
    warnings.warn("optimal rank-n residual is zero but the Nystrom residual is not")
    return float("inf")


def approximation_factors(
    data, sample, kernel, kernel_matrix=None, eigenvalues=None
) -> ApproximationReport:
    """Residual norms of the Nystrom approximation and their factors.

    Dense residual norms for N <= 2000; above that the norms are computed
    from the low-rank factor (diagonal trace path, inner-product Frobenius,
    Lanczos spectral norm) without materialising K_hat.  ``kernel_matrix``
    and ``eigenvalues`` of K can be passed to amortise repeated reports on
    one dataset; both are computed on the fly otherwise (the
    eigendecomposition is O(N^3)).
    """
    X = check_dataset(data)
    S = check_landmarks(sample, X.shape[1])
    N, n = X.shape[0], S.shape[0]
    if n > N:
        raise ValueError(f"more landmarks ({n}) than data points ({N})")
    K = kernel.k_cross(X, X) if kernel_matrix is None else np.asarray(kernel_matrix)
    if eigenvalues is None:
        eigenvalues = np.linalg.eigvalsh(K)
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]

    B, rank = nystrom_factor(X, S, kernel)
    if N <= _DENSE_EIG_MAX:
        R = K - B @ B.T
        trace = float(np.trace(R))
        frob = float(np.linalg.norm(R, "fro"))
        spec = max(float(np.linalg.eigvalsh(R)[-1]), 0.0)
    else:
        trace = float(kernel.k_diag(X).sum() - np.einsum("ij,ij->i", B, B).sum())
        KB = K @ B
        frob_sq = (
            float((K * K).sum())
            - 2.0 * float(np.einsum("ij,ij->", KB, B))
            + float(((B.T @ B) ** 2).sum())
        )
        frob = float(np.sqrt(max(frob_sq, 0.0)))
        spec = max(_lanczos_lmax(lambda v: K @ v - B @ (B.T @ v), N), 0.0)

    base_tr, base_f, base_sp = optimal_rank_n(X, n, kernel, eigenvalues=lam)
    return ApproximationReport(
        trace_err=trace,
        frob_err=frob,
        spec_err=spec,
        factor_tr=_factor(trace, base_tr, float(lam.sum())),
        factor_f=_factor(frob, base_f, float(np.sqrt((lam**2).sum()))),
        factor_sp=_factor(spec, base_sp, float(lam[0])),
        rank_used=rank,
    )

"""Shared helpers for the test suite: instance generators and FD oracles."""

import numpy as np

from nystromopt import SquaredExponentialKernel, kernel_frobenius_sq, skd_gradient, skd_value


def random_instance(rng, n_min=1, n_max=8, N_min=10, N_max=100, d_min=1, d_max=5,
                    rho_min=0.1, rho_max=4.0, jitter=0.05):
    """A dataset, a perturbed-subset landmark sample, and a kernel."""
    N = int(rng.integers(N_min, N_max + 1))
    n = int(rng.integers(n_min, min(n_max, N) + 1))
    d = int(rng.integers(d_min, d_max + 1))
    rho = float(rng.uniform(rho_min, rho_max))
    X = rng.uniform(-1.5, 1.5, size=(N, d))
    S = X[rng.choice(N, n, replace=False)] + jitter * rng.standard_normal((n, d))
    return X, S, SquaredExponentialKernel(rho)


def fd_skd_gradient(X, S, kernel, k_frob_sq=None, h=1e-5):
    """Central finite differences of skd_value, coordinate by coordinate."""
    if k_frob_sq is None:
        k_frob_sq = kernel_frobenius_sq(X, kernel)
    fd = np.zeros_like(S)
    for k in range(S.shape[0]):
        for l in range(S.shape[1]):
            plus = S.copy()
            plus[k, l] += h
            minus = S.copy()
            minus[k, l] -= h
            fd[k, l] = (
                skd_value(X, plus, kernel, k_frob_sq) - skd_value(X, minus, kernel, k_frob_sq)
            ) / (2.0 * h)
    return fd


def fd_skd_hessian(X, S, kernel, h=1e-5):
    """Central finite differences of skd_gradient, one row per coordinate."""
    n, d = S.shape
    rows = np.zeros((n * d, n * d))
    for k in range(n):
        for l in range(d):
            plus = S.copy()
            plus[k, l] += h
            minus = S.copy()
            minus[k, l] -= h
            rows[k * d + l] = (
                (skd_gradient(X, plus, kernel) - skd_gradient(X, minus, kernel)) / (2.0 * h)
            ).ravel()
    return rows


class ZeroKernel:
    """Degenerate squared kernel that vanishes everywhere (test stub)."""

    def k_cross(self, A, B):
        return np.zeros((len(np.atleast_2d(A)), len(np.atleast_2d(B))))

    def k_diag(self, A):
        return np.zeros(len(np.atleast_2d(A)))

    def k2_cross(self, A, B):
        return np.zeros((len(np.atleast_2d(A)), len(np.atleast_2d(B))))

    def k2_grad_left_cross(self, A, B):
        A, B = np.atleast_2d(A), np.atleast_2d(B)
        return np.zeros((A.shape[0], B.shape[0], A.shape[1]))

    def k2_hess_left_left_cross(self, A, B):
        A, B = np.atleast_2d(A), np.atleast_2d(B)
        return np.zeros((A.shape[0], B.shape[0], A.shape[1], A.shape[1]))

    def k2_hess_left_right_cross(self, A, B):
        return self.k2_hess_left_left_cross(A, B)

    def k2_grad_diag(self, A):
        return np.zeros_like(np.atleast_2d(A))

    def k2_hess_diag(self, A):
        A = np.atleast_2d(A)
        return np.zeros((A.shape[0], A.shape[1], A.shape[1]))

"""Gaussian kernel, its square, and the squared-kernel derivatives.

All optimisation code in this package works with the *squared* kernel
K^2(x, y) = K(x, y)^2.  A kernel object must provide, besides plain
evaluation, the following vectorised squared-kernel entry points (the
"left" derivative differentiates the first argument, the "right" one the
second, and "diag" differentiates the map s -> K^2(s, s)):

  k2_cross(A, B)             -> (a, b) matrix of K^2 values
  k2_grad_left_cross(A, B)   -> (a, b, d) left partials
  k2_hess_left_left_cross    -> (a, b, d, d) second left/left partials
  k2_hess_left_right_cross   -> (a, b, d, d) mixed left/right partials
  k2_grad_diag(A)            -> (a, d) diagonal-map first partials
  k2_hess_diag(A)            -> (a, d, d) diagonal-map second partials
  derivative_bounds()        -> SquaredKernelBounds

Coordinate indices in the scalar entry points are 0-based.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["SquaredExponentialKernel", "SquaredKernelBounds"]


@dataclass(frozen=True)
class SquaredKernelBounds:
    """Uniform bounds on the squared kernel and its partial derivatives.

    alpha lower-bounds K^2(x, x); m1 dominates all first partials of K^2
    (left and diagonal kinds); m2 dominates all second partials
    (left/left, left/right and diagonal/diagonal kinds).
    """

    alpha: float
    m1: float
    m2: float


def _as_point(x, name):
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1:
        raise ValueError(f"{name} must be a single point (1-D array), got shape {p.shape}")
    return p


def _check_pair(x, y):
    x = _as_point(x, "x")
    y = _as_point(y, "y")
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"dimension mismatch: x has d={x.shape[0]}, y has d={y.shape[0]}")
    return x, y


def _check_coord(l, d):
    if not 0 <= l < d:
        raise ValueError(f"coordinate index {l} out of range for dimension {d}")


class SquaredExponentialKernel:
    """Gaussian kernel K(x, y) = exp(-rho * ||x - y||^2) with rho > 0.

    K(x, x) = 1 for every x, so the squared kernel K^2 = exp(-2 rho ||x-y||^2)
    also has unit diagonal.  Squared distances use the plain sum of squared
    coordinate differences in double precision; no expansion tricks, so that
    finite-difference checks of the derivative entry points stay tight.
    """

    def __init__(self, rho: float):
        rho = float(rho)
        if not rho > 0:
            raise ValueError(f"rho must be positive, got {rho}")
        self.rho = rho

    # -- plain kernel ----------------------------------------------------

    def k(self, x, y) -> float:
        x, y = _check_pair(x, y)
        diff = x - y
        return float(np.exp(-self.rho * np.dot(diff, diff)))

    def k_cross(self, A, B) -> np.ndarray:
        """Kernel matrix K(a_i, b_j) for row sets A (a, d) and B (b, d)."""
        return np.exp(-self.rho * _sq_dists(A, B))

    def k_diag(self, A) -> np.ndarray:
        """K(a_i, a_i) for each row; identically one for this kernel."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return np.ones(A.shape[0])

    # -- squared kernel and its derivatives ------------------------------

    def k2(self, x, y) -> float:
        """Squared kernel K^2(x, y) = exp(-2 rho ||x - y||^2), in (0, 1]."""
        x, y = _check_pair(x, y)
        diff = x - y
        return float(np.exp(-2.0 * self.rho * np.dot(diff, diff)))

    def k2_partial_left(self, x, y, l: int) -> float:
        """Partial derivative of s -> K^2(s, y) at s = x, coordinate l."""
        x, y = _check_pair(x, y)
        _check_coord(l, x.shape[0])
        return -4.0 * self.rho * (x[l] - y[l]) * self.k2(x, y)

    def k2_partial_right(self, x, y, l: int) -> float:
        """Partial derivative of s -> K^2(x, s) at s = y, coordinate l."""
        x, y = _check_pair(x, y)
        _check_coord(l, x.shape[0])
        return 4.0 * self.rho * (x[l] - y[l]) * self.k2(x, y)

    def k2_partial_diag(self, x, l: int) -> float:
        """Partial derivative of s -> K^2(s, s) at s = x; zero here since
        the squared kernel has constant unit diagonal."""
        x = _as_point(x, "x")
        _check_coord(l, x.shape[0])
        return 0.0

    def k2_second_partials(self, x, y, l: int, l2: int):
        """The three bounded second-derivative kinds at (x, y).

        Returns (left_left, left_right, diag_diag) where left_left is the
        second partial of K^2 in coordinates l and l2 of the first argument,
        left_right mixes first and second argument, and diag_diag is the
        second derivative of the diagonal map (identically zero here).
        """
        x, y = _check_pair(x, y)
        d = x.shape[0]
        _check_coord(l, d)
        _check_coord(l2, d)
        rho = self.rho
        k2 = self.k2(x, y)
        left_left = (-4.0 * rho * (l == l2) + 16.0 * rho**2 * (x[l] - y[l]) * (x[l2] - y[l2])) * k2
        return left_left, -left_left, 0.0

    # -- vectorised forms used by the optimisation loops -----------------

    def k2_cross(self, A, B) -> np.ndarray:
        return np.exp(-2.0 * self.rho * _sq_dists(A, B))

    def k2_grad_left_cross(self, A, B) -> np.ndarray:
        """(a, b, d) array of left partials of K^2(a_i, b_j)."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        diff = A[:, None, :] - B[None, :, :]
        k2 = np.exp(-2.0 * self.rho * np.einsum("ijk,ijk->ij", diff, diff))
        return -4.0 * self.rho * diff * k2[:, :, None]

    def k2_hess_left_left_cross(self, A, B) -> np.ndarray:
        """(a, b, d, d) array of left/left second partials of K^2(a_i, b_j)."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        d = A.shape[1]
        diff = A[:, None, :] - B[None, :, :]
        k2 = np.exp(-2.0 * self.rho * np.einsum("ijk,ijk->ij", diff, diff))
        outer = 16.0 * self.rho**2 * diff[:, :, :, None] * diff[:, :, None, :]
        outer -= 4.0 * self.rho * np.eye(d)
        return outer * k2[:, :, None, None]

    def k2_hess_left_right_cross(self, A, B) -> np.ndarray:
        """(a, b, d, d) array of mixed left/right second partials."""
        return -self.k2_hess_left_left_cross(A, B)

    def k2_grad_diag(self, A) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return np.zeros_like(A)

    def k2_hess_diag(self, A) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        a, d = A.shape
        return np.zeros((a, d, d))

    # -- derivative bounds ------------------------------------------------

    def derivative_bounds(self) -> SquaredKernelBounds:
        """Uniform derivative bounds for this kernel.

        alpha = 1 (unit diagonal) and m1 = 2 sqrt(rho) e^{-1/2}, the exact
        supremum of |first partials| of K^2.  m2 is obtained numerically:
        the suprema of the second-partial magnitudes are radial, so a dense
        grid over r in [0, 10/sqrt(rho)] followed by golden-section
        refinement is enough.  m2 is only used for a conservative stepsize
        bound, so the numerical route is preferred over error-prone algebra.
        """
        rho = self.rho
        m1 = 2.0 * np.sqrt(rho) * np.exp(-0.5)
        r_max = 10.0 / np.sqrt(rho)

        def same_coord(r):
            # sup over |u| <= r of |16 rho^2 u^2 - 4 rho|, attained at u in {0, r}
            u2 = r * r
            return max(4.0 * rho, abs(16.0 * rho**2 * u2 - 4.0 * rho)) * np.exp(-2.0 * rho * u2)

        def cross_coord(r):
            # sup over u^2 + v^2 <= r^2 of |16 rho^2 u v|, attained at u = v
            return 8.0 * rho**2 * r * r * np.exp(-2.0 * rho * r * r)

        m2 = max(_radial_maximum(same_coord, r_max), _radial_maximum(cross_coord, r_max))
        return SquaredKernelBounds(alpha=1.0, m1=float(m1), m2=float(m2))


def _sq_dists(A, B) -> np.ndarray:
    """Pairwise squared Euclidean distances via explicit differences."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]} columns")
    diff = A[:, None, :] - B[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _radial_maximum(f, r_max: float, n_grid: int = 4001, tol: float = 1e-10) -> float:
    """Maximise f over [0, r_max]: dense grid, then golden-section refinement."""
    grid = np.linspace(0.0, r_max, n_grid)
    values = np.array([f(r) for r in grid])
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, n_grid - 1)]
    # golden-section search for the maximum on [lo, hi]
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return max(values[i], fc, fd)

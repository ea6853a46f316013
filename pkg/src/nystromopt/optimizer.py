"""Scikit-learn style transformer wrapping the landmark optimisation loop."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .approximation import _psd_pinv_root
from .data import sample_initial
from .descent import DescentConfig, run_descent, step_size_from_lipschitz
from .discrepancy import kernel_frobenius_sq, lipschitz_bounds, skd_value
from .kernels import SquaredExponentialKernel

__all__ = ["OptimizedNystroem"]


class OptimizedNystroem(TransformerMixin, BaseEstimator):
    """Nystrom feature map whose landmarks are tuned by discrepancy descent.

    Landmarks start as a uniform without-replacement draw from the training
    rows and are then moved through the ambient space by (stochastic)
    gradient descent on the squared-kernel discrepancy, which tightens the
    kernel-matrix approximation K_hat = transform(X) @ transform(X).T.

    Parameters
    ----------
    n_landmarks : int, number of landmark points.
    rho : float, Gaussian kernel parameter exp(-rho ||x - y||^2).
    step_size : float or "auto"; "auto" uses safety divided by the
        Lipschitz bound of the discrepancy gradient (conservative, and
        needs one O(N^2) pass to bound the kernel Frobenius norm).
    safety : float in (0, 1], only used with step_size="auto".
    n_iter : int, fixed number of descent iterations.
    gradient_estimator : "exact", "one-sample" or "two-sample".
    batch_size : int, batch size per iteration for the stochastic modes.
    batch_split : optional (b_x, b_y) split for "two-sample".
    log_every : int, discrepancy logging cadence (in iterations).
    random_state : seed for the PCG64 generators behind the initial draw
        and the batch stream.

    Attributes
    ----------
    landmarks_ : (n_landmarks, d) optimised landmark points.
    normalization_ : (n_landmarks, r) map applied to the cross-kernel
        block in transform.
    trace_ : TraceLog of discrepancy values along the descent.
    skd_initial_, skd_final_ : discrepancy before and after.
    """

    def __init__(
        self,
        n_landmarks=10,
        rho=1.0,
        step_size=1e-6,
        safety=1.0,
        n_iter=1000,
        gradient_estimator="exact",
        batch_size=50,
        batch_split=None,
        log_every=100,
        random_state=None,
    ):
        self.n_landmarks = n_landmarks
        self.rho = rho
        self.step_size = step_size
        self.safety = safety
        self.n_iter = n_iter
        self.gradient_estimator = gradient_estimator
        self.batch_size = batch_size
        self.batch_split = batch_split
        self.log_every = log_every
        self.random_state = random_state

    def _kernel(self):
        return SquaredExponentialKernel(self.rho)

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        kernel = self._kernel()
        seed = self.random_state
        if seed is None:
            seed = int(np.random.SeedSequence().generate_state(1)[0])
        k_frob_sq = kernel_frobenius_sq(X, kernel)
        if self.step_size == "auto":
            bounds = lipschitz_bounds(
                self.n_landmarks,
                X.shape[0],
                X.shape[1],
                kernel.derivative_bounds(),
                np.sqrt(k_frob_sq),
            )
            gamma = step_size_from_lipschitz(bounds, self.safety)
        else:
            gamma = float(self.step_size)
        config = DescentConfig(
            step_size=gamma,
            iterations=self.n_iter,
            estimator=self.gradient_estimator,
            batch_size=self.batch_size,
            batch_split=self.batch_split,
            seed=seed,
            log_every=self.log_every,
        )
        initial = sample_initial(X, self.n_landmarks, seed)
        landmarks, trace = run_descent(X, initial, kernel, config, k_frob_sq=k_frob_sq)
        self.landmarks_ = landmarks
        self.normalization_, self.rank_ = _psd_pinv_root(
            kernel.k_cross(landmarks, landmarks)
        )
        self.trace_ = trace
        self.skd_initial_ = trace.skd[0]
        self.skd_final_ = trace.skd[-1]
        self.step_size_ = gamma
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        """Map rows to features whose Gram matrix is the Nystrom approximation."""
        check_is_fitted(self, "landmarks_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, fitted with {self.n_features_in_}"
            )
        return self._kernel().k_cross(X, self.landmarks_) @ self.normalization_

    def score(self, X, y=None):
        """Negative discrepancy of the fitted landmarks on X (higher is better).

        Includes the O(N^2) kernel Frobenius term of X.
        """
        check_is_fitted(self, "landmarks_")
        X = check_array(X, dtype=np.float64)
        return -skd_value(X, self.landmarks_, self._kernel())

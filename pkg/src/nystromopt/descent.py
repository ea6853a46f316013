"""Fixed-stepsize (stochastic) gradient descent over landmark configurations."""

import time
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_dataset, check_landmarks
from .discrepancy import (
    LipschitzBounds,
    _projection_sq,
    kernel_frobenius_sq,
    skd_gradient,
)
from .stochastic import draw_batch, one_sample_gradient, two_sample_gradient

__all__ = ["DescentConfig", "TraceLog", "run_descent", "step_size_from_lipschitz"]

_ESTIMATORS = ("exact", "one-sample", "two-sample")


@dataclass(frozen=True)
class DescentConfig:
    """Parameters of one descent run.

    estimator selects the gradient: "exact", "one-sample" or "two-sample".
    batch_size is the total batch b per iteration (ignored for exact);
    two-sample runs split it as batch_split, defaulting to halves.  The
    discrepancy is logged at iteration 0, every log_every iterations, and
    at the final iteration.  full_batches replaces random batches with a
    deterministic enumeration of the whole dataset, which turns either
    stochastic estimator into the exact gradient (useful for testing).
    include_constant=False logs R(S) - ||K||_F^2, skipping the O(N^2)
    constant entirely; the logged values are then <= 0.
    """

    step_size: float
    iterations: int
    estimator: str = "exact"
    batch_size: int = 50
    batch_split: tuple[int, int] | None = None
    seed: int = 0
    log_every: int = 100
    full_batches: bool = False
    include_constant: bool = True

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.log_every < 1:
            raise ValueError(f"log_every must be >= 1, got {self.log_every}")
        if self.estimator not in _ESTIMATORS:
            raise ValueError(f"estimator must be one of {_ESTIMATORS}, got {self.estimator!r}")
        if self.estimator != "exact" and self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.batch_split is not None:
            bx, by = self.batch_split
            if bx < 1 or by < 1 or bx + by != self.batch_size:
                raise ValueError(
                    f"batch_split {self.batch_split} must be positive and sum to "
                    f"batch_size={self.batch_size}"
                )

    def split(self) -> tuple[int, int]:
        if self.batch_split is not None:
            return self.batch_split
        bx = max(self.batch_size // 2, 1)
        return bx, max(self.batch_size - bx, 1)


@dataclass
class TraceLog:
    """Discrepancy values recorded along a descent, with wall-clock times."""

    iterations: list[int] = field(default_factory=list)
    skd: list[float] = field(default_factory=list)
    wall_time: list[float] = field(default_factory=list)

    def append(self, iteration: int, value: float, elapsed: float):
        self.iterations.append(iteration)
        self.skd.append(value)
        self.wall_time.append(elapsed)


def run_descent(data, initial, kernel, config: DescentConfig, k_frob_sq: float | None = None):
    """Iterate S <- S - gamma * g(S) for the configured number of steps.

    Returns (final_landmarks, trace).  The gradient g is exact or one of
    the stochastic estimators; batches are drawn from a PCG64 stream
    seeded with config.seed, so runs are reproducible.  Aborts with a
    RuntimeError naming the iteration if the gradient or a logged value
    turns non-finite.  Pass a cached ``k_frob_sq`` to avoid the one O(N^2)
    pass that logging R(S) otherwise needs.
    """
    X = check_dataset(data)
    S = check_landmarks(initial, X.shape[1]).copy()
    n_points = X.shape[0]
    if config.include_constant and k_frob_sq is None:
        k_frob_sq = kernel_frobenius_sq(X, kernel)

    rng = np.random.default_rng(config.seed)
    gamma = config.step_size
    trace = TraceLog()
    start = time.perf_counter()

    def log(iteration):
        part = _projection_sq(X, S, kernel)
        if config.include_constant:
            value = max(k_frob_sq - part, 0.0)
        else:
            value = -part
        if not np.isfinite(value):
            raise RuntimeError(f"non-finite discrepancy at iteration {iteration}")
        trace.append(iteration, value, time.perf_counter() - start)

    def gradient():
        if config.estimator == "exact":
            return skd_gradient(X, S, kernel)
        if config.full_batches:
            batch = np.arange(n_points)
            if config.estimator == "one-sample":
                return one_sample_gradient(X, S, batch, kernel)
            return two_sample_gradient(X, S, batch, batch, kernel)
        if config.estimator == "one-sample":
            batch = draw_batch(n_points, config.batch_size, rng)
            return one_sample_gradient(X, S, batch, kernel)
        bx, by = config.split()
        batch_x = draw_batch(n_points, bx, rng)
        batch_y = draw_batch(n_points, by, rng)
        return two_sample_gradient(X, S, batch_x, batch_y, kernel)

    log(0)
    for t in range(1, config.iterations + 1):
        g = gradient()
        if not np.all(np.isfinite(g)):
            raise RuntimeError(f"non-finite gradient at iteration {t}")
        with np.errstate(over="raise"):
            try:
                S -= gamma * g
            except FloatingPointError:
                raise RuntimeError(
                    f"landmark update overflowed at iteration {t}; reduce the stepsize"
                ) from None
        if t % config.log_every == 0 or t == config.iterations:
            log(t)
    return S, trace


def step_size_from_lipschitz(bounds: LipschitzBounds, safety: float = 1.0) -> float:
    """Stepsize safety / L; exact descent is monotone for safety <= 1."""
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety must lie in (0, 1], got {safety}")
    if bounds.l_const <= 0.0:
        raise ValueError("Lipschitz constant is zero; choose a stepsize directly")
    return safety / bounds.l_const

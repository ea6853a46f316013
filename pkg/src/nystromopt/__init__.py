"""Gradient-based optimisation of Nystrom landmarks for kernel matrices.

The package evaluates and minimises the squared-kernel discrepancy of a
landmark multiset by exact or stochastic gradient descent, and measures
the resulting Nystrom approximation in trace, Frobenius and spectral
norms.  All randomness flows through numpy's PCG64 generator, seeded
explicitly, so every run is reproducible.
"""

from .approximation import (
    ApproximationReport,
    approximation_factors,
    nystrom_diag,
    nystrom_factor,
    nystrom_from_columns,
    nystrom_matrix,
    nystrom_trace_error,
    optimal_rank_n,
    residual_norms,
)
from .data import (
    bigaussian_generate,
    deduplicate,
    exclude_rows,
    load_csv,
    load_row_exclusions,
    sample_initial,
    standardize,
)
from .descent import DescentConfig, TraceLog, run_descent, step_size_from_lipschitz
from .discrepancy import (
    LipschitzBounds,
    SkdTerms,
    kernel_frobenius_sq,
    lipschitz_bounds,
    skd_gradient,
    skd_hessian,
    skd_terms,
    skd_value,
)
from .kernels import SquaredExponentialKernel, SquaredKernelBounds
from .optimizer import OptimizedNystroem
from .stochastic import draw_batch, one_sample_gradient, t1_hat, t2_hat, two_sample_gradient

__version__ = "0.1.0"

__all__ = [
    "ApproximationReport",
    "DescentConfig",
    "LipschitzBounds",
    "OptimizedNystroem",
    "SkdTerms",
    "SquaredExponentialKernel",
    "SquaredKernelBounds",
    "TraceLog",
    "approximation_factors",
    "bigaussian_generate",
    "deduplicate",
    "draw_batch",
    "exclude_rows",
    "kernel_frobenius_sq",
    "lipschitz_bounds",
    "load_csv",
    "load_row_exclusions",
    "nystrom_diag",
    "nystrom_factor",
    "nystrom_from_columns",
    "nystrom_matrix",
    "nystrom_trace_error",
    "one_sample_gradient",
    "optimal_rank_n",
    "residual_norms",
    "run_descent",
    "sample_initial",
    "skd_gradient",
    "skd_hessian",
    "skd_terms",
    "skd_value",
    "standardize",
    "step_size_from_lipschitz",
    "t1_hat",
    "t2_hat",
    "two_sample_gradient",
]

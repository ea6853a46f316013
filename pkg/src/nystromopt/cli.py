"""Command-line interface: generate | optimize | evaluate | lipschitz.

Outputs are UTF-8 CSV (datasets, landmarks, traces) and JSON/JSONL
(per-repetition records); see the README for the exact schemas.  The
repetition loop of `optimize` derives seed base_seed + r for repetition r,
so runs can be reproduced or parallelised independently; set
NYSTROMOPT_THREADS to run repetitions on a thread pool.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

import numpy as np

from .approximation import (
    _DENSE_EIG_MAX,
    _lanczos_lmax,
    approximation_factors,
    nystrom_factor,
    nystrom_trace_error,
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
from .descent import DescentConfig, run_descent, step_size_from_lipschitz
from .discrepancy import kernel_frobenius_sq, lipschitz_bounds, skd_value
from .kernels import SquaredExponentialKernel

_METRICS = ("skd", "trace", "frobenius", "spectral", "factors")


def _add_dataset_args(p):
    src = p.add_argument_group("dataset")
    src.add_argument("--data", help="CSV file of data points, one row per point")
    src.add_argument("--bigaussian", type=int, metavar="N",
                     help="use N points drawn from the synthetic two-mode distribution")
    src.add_argument("--data-seed", type=int, default=0,
                     help="seed for --bigaussian generation (default 0)")
    src.add_argument("--has-header", action="store_true", help="skip one CSV header line")
    src.add_argument("--exclude", metavar="FILE",
                     help="file of 0-based row indices to drop, one per line")
    src.add_argument("--deduplicate", action="store_true", help="drop exact duplicate rows")
    src.add_argument("--standardize", action="store_true",
                     help="scale each column to zero mean, unit variance")


def _load_dataset(args, parser):
    if args.data is not None and args.bigaussian is not None:
        parser.error("give either --data or --bigaussian, not both")
    if args.data is not None:
        X = load_csv(args.data, has_header=args.has_header)
    elif args.bigaussian is not None:
        if args.bigaussian < 1:
            parser.error("--bigaussian needs a positive point count")
        X = bigaussian_generate(args.bigaussian, seed=args.data_seed)
    else:
        parser.error("a dataset is required: --data FILE or --bigaussian N")
    if args.exclude:
        X = exclude_rows(X, load_row_exclusions(args.exclude))
    if args.deduplicate:
        X = deduplicate(X)
    if args.standardize:
        X = standardize(X)
    return X


def _parse_metrics(raw: str):
    metrics = tuple(m.strip() for m in raw.split(",") if m.strip())
    for m in metrics:
        if m not in _METRICS:
            raise ValueError(f"unknown metric {m!r}; choose from {', '.join(_METRICS)}")
    if not metrics:
        raise ValueError("at least one metric is required")
    return metrics


class _DatasetCache:
    """Kernel quantities shared across repetitions, built once per dataset."""

    def __init__(self, X, kernel):
        self.X = X
        self.kernel = kernel
        self.K = None
        self.eigenvalues = None
        self.k_frob_sq = None

    def prepare(self, metrics):
        needs_k = any(m in metrics for m in ("frobenius", "spectral", "factors"))
        if needs_k and self.K is None:
            self.K = self.kernel.k_cross(self.X, self.X)
        if "factors" in metrics and self.eigenvalues is None:
            self.eigenvalues = np.linalg.eigvalsh(self.K)
        if "skd" in metrics and self.k_frob_sq is None:
            if self.K is not None:
                self.k_frob_sq = float((self.K**2).sum())
            else:
                self.k_frob_sq = kernel_frobenius_sq(self.X, self.kernel)


def _metric_values(cache: _DatasetCache, landmarks, metrics):
    """One dict of metric values for a landmark configuration."""
    X, kernel = cache.X, cache.kernel
    out = {}
    if "skd" in metrics:
        out["skd"] = skd_value(X, landmarks, kernel, k_frob_sq=cache.k_frob_sq)
    if "factors" in metrics:
        # factors always carry the three norms they are built from
        report = approximation_factors(
            X, landmarks, kernel, kernel_matrix=cache.K, eigenvalues=cache.eigenvalues
        )
        out["trace"] = report.trace_err
        out["frobenius"] = report.frob_err
        out["spectral"] = report.spec_err
        out["factor_tr"] = report.factor_tr
        out["factor_f"] = report.factor_f
        out["factor_sp"] = report.factor_sp
        out["rank_used"] = report.rank_used
        return out
    if "trace" in metrics:
        out["trace"] = nystrom_trace_error(X, landmarks, kernel)
    if "frobenius" in metrics or "spectral" in metrics:
        K = cache.K
        B, _ = nystrom_factor(X, landmarks, kernel)
        if "frobenius" in metrics:
            KB = K @ B
            frob_sq = (
                float((K * K).sum())
                - 2.0 * float(np.einsum("ij,ij->", KB, B))
                + float(((B.T @ B) ** 2).sum())
            )
            out["frobenius"] = float(np.sqrt(max(frob_sq, 0.0)))
        if "spectral" in metrics:
            N = X.shape[0]
            if N <= _DENSE_EIG_MAX:
                out["spectral"] = float(np.linalg.eigvalsh(K - B @ B.T)[-1])
            else:
                out["spectral"] = _lanczos_lmax(lambda v: K @ v - B @ (B.T @ v), N)
    return out


def _write_csv(path, array):
    np.savetxt(path, np.atleast_2d(array), delimiter=",", fmt="%.17g")


def cmd_generate(args, parser):
    if not args.bigaussian_flag:
        parser.error("only --bigaussian generation is available")
    if args.n < 1:
        parser.error("--n must be a positive point count")
    X = bigaussian_generate(args.n, seed=args.seed, weight=args.weight)
    _write_csv(args.out, X)
    print(f"wrote {X.shape[0]} points of dimension {X.shape[1]} (seed {args.seed}) to {args.out}")
    return 0


def cmd_optimize(args, parser):
    if args.reps < 1:
        parser.error("--reps must be >= 1")
    X = _load_dataset(args, parser)
    kernel = SquaredExponentialKernel(args.rho)
    metrics = _parse_metrics(args.metrics)
    if args.estimator == "exact" and args.batch is not None:
        print("warning: --batch is ignored with --estimator exact", file=sys.stderr)

    cache = _DatasetCache(X, kernel)
    # the descent trace already reports the discrepancy before and after,
    # so "skd" never needs a separate per-repetition evaluation here
    extra_metrics = tuple(m for m in metrics if m != "skd")
    cache.prepare(extra_metrics)
    k_frob_sq = None
    if not args.no_skd_constant or args.gamma == "auto":
        cache.prepare(("skd",))
        k_frob_sq = cache.k_frob_sq

    if args.gamma == "auto":
        bounds = lipschitz_bounds(
            args.n, X.shape[0], X.shape[1], kernel.derivative_bounds(), np.sqrt(k_frob_sq)
        )
        gamma = step_size_from_lipschitz(bounds, safety=args.safety)
        print(f"auto stepsize: gamma = {gamma:.6e} (L = {bounds.l_const:.6e})")
    else:
        gamma = float(args.gamma)

    batch = args.batch if args.batch is not None else 50
    split = None
    if args.batch_x is not None or args.batch_y is not None:
        if args.batch_x is None or args.batch_y is None:
            parser.error("--batch-x and --batch-y must be given together")
        split = (args.batch_x, args.batch_y)
        batch = args.batch_x + args.batch_y

    def one_rep(r):
        seed = args.seed + r
        config = DescentConfig(
            step_size=gamma,
            iterations=args.iters,
            estimator=args.estimator,
            batch_size=batch,
            batch_split=split,
            seed=seed,
            log_every=args.log_every,
            include_constant=not args.no_skd_constant,
        )
        initial = sample_initial(X, args.n, seed)
        t0 = time.perf_counter()
        final, trace = run_descent(
            X, initial, kernel, config,
            k_frob_sq=None if args.no_skd_constant else k_frob_sq,
        )
        t1 = time.perf_counter()
        row = {"rep": r, "seed": seed,
               "skd_initial": trace.skd[0], "skd_final": trace.skd[-1]}
        for key, value in _metric_values(cache, initial, extra_metrics).items():
            row[f"{key}_initial"] = value
        for key, value in _metric_values(cache, final, extra_metrics).items():
            row[f"{key}_final"] = value
        t2 = time.perf_counter()
        row["seconds_descent"] = t1 - t0
        row["seconds_metrics"] = t2 - t1
        if args.trace_dir:
            path = os.path.join(args.trace_dir, f"trace_rep{r:04d}.csv")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("iteration,skd,seconds\n")
                for it, value, sec in zip(trace.iterations, trace.skd, trace.wall_time):
                    fh.write(f"{it},{value:.17g},{sec:.6f}\n")
        if args.landmarks_dir:
            _write_csv(os.path.join(args.landmarks_dir, f"landmarks_rep{r:04d}_initial.csv"), initial)
            _write_csv(os.path.join(args.landmarks_dir, f"landmarks_rep{r:04d}_final.csv"), final)
        return row

    for d in (args.trace_dir, args.landmarks_dir):
        if d:
            os.makedirs(d, exist_ok=True)

    reps = range(1, args.reps + 1)
    workers = int(os.environ.get("NYSTROMOPT_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one_rep, reps))
    else:
        rows = [one_rep(r) for r in reps]

    sink = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for row in rows:
            sink.write(json.dumps(row) + "\n")
    finally:
        if sink is not sys.stdout:
            sink.close()
            print(f"wrote {len(rows)} repetition records to {args.out}")
    return 0


def cmd_evaluate(args, parser):
    X = _load_dataset(args, parser)
    landmarks = load_csv(args.landmarks)
    kernel = SquaredExponentialKernel(args.rho)
    metrics = _parse_metrics(args.metrics)
    cache = _DatasetCache(X, kernel)
    cache.prepare(metrics)
    report = _metric_values(cache, landmarks, metrics)
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_lipschitz(args, parser):
    X = _load_dataset(args, parser)
    kernel = SquaredExponentialKernel(args.rho)
    k_frob = np.sqrt(kernel_frobenius_sq(X, kernel))
    bounds = lipschitz_bounds(
        args.n, X.shape[0], X.shape[1], kernel.derivative_bounds(), k_frob
    )
    out = asdict(bounds)
    out["suggested_gamma"] = step_size_from_lipschitz(bounds, safety=args.safety)
    print(json.dumps(out, indent=2))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nystromopt",
        description="Optimise Nystrom landmarks by squared-kernel discrepancy descent.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    p.add_argument("--bigaussian", dest="bigaussian_flag", action="store_true",
                   help="two-mode Gaussian mixture restricted to [-1,1]^2")
    p.add_argument("--n", type=int, required=True, help="number of points")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weight", type=float, default=0.5, help="probability of the first mode")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("optimize", help="repeated initialise-optimise-evaluate runs")
    _add_dataset_args(p)
    p.add_argument("--rho", type=float, required=True, help="Gaussian kernel parameter")
    p.add_argument("--n", type=int, required=True, help="number of landmarks")
    p.add_argument("--estimator", choices=("exact", "one-sample", "two-sample"),
                   default="exact")
    p.add_argument("--batch", type=int, default=None, help="total batch size b")
    p.add_argument("--batch-x", type=int, default=None, help="two-sample first batch size")
    p.add_argument("--batch-y", type=int, default=None, help="two-sample second batch size")
    p.add_argument("--gamma", default="1e-6", help="stepsize, or 'auto' for safety/L")
    p.add_argument("--safety", type=float, default=1.0, help="safety factor for --gamma auto")
    p.add_argument("--iters", type=int, required=True, help="iterations T")
    p.add_argument("--reps", type=int, default=1, help="number of repetitions m")
    p.add_argument("--seed", type=int, default=0, help="base seed; repetition r uses seed+r")
    p.add_argument("--log-every", type=int, default=100)
    p.add_argument("--metrics", default="skd",
                   help="comma list from: " + ", ".join(_METRICS))
    p.add_argument("--no-skd-constant", action="store_true",
                   help="log the discrepancy without its O(N^2) constant term")
    p.add_argument("--out", default=None, help="JSONL output path (default stdout)")
    p.add_argument("--trace-dir", default=None, help="write per-repetition trace CSVs here")
    p.add_argument("--landmarks-dir", default=None,
                   help="write per-repetition landmark CSVs here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="report approximation quality of stored landmarks")
    _add_dataset_args(p)
    p.add_argument("--landmarks", required=True, help="CSV of landmark points")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--metrics", default="skd,factors",
                   help="comma list from: " + ", ".join(_METRICS))
    p.add_argument("--out", default=None, help="JSON output path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("lipschitz", help="print the gradient Lipschitz bound and stepsize")
    _add_dataset_args(p)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="number of landmarks")
    p.add_argument("--safety", type=float, default=1.0)
    p.set_defaults(func=cmd_lipschitz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

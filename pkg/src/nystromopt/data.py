"""Dataset loading, cleaning, standardisation and initial landmark draws.

Datasets are plain (N, d) float64 arrays; landmark samples are (n, d)
arrays (multisets: duplicated rows are allowed).  Every random operation
takes a seed or a numpy Generator and uses numpy's PCG64 stream, so the
same inputs always reproduce the same output.
"""

import csv

import numpy as np

from ._validation import check_dataset

__all__ = [
    "load_csv",
    "load_row_exclusions",
    "exclude_rows",
    "standardize",
    "deduplicate",
    "bigaussian_generate",
    "sample_initial",
]

# modes of the synthetic two-component Gaussian mixture
_BIGAUSS_MODES = np.array([[-0.8, 0.8], [0.8, -0.8]])
_BIGAUSS_STD = np.sqrt(0.5)


def load_csv(path, has_header: bool = False) -> np.ndarray:
    """Load a rectangular numeric CSV file as an (N, d) float array.

    Lines are comma-separated decimal reals, UTF-8, with an optional single
    header line.  Ragged rows, non-numeric cells and non-finite values are
    rejected with the offending 1-based line (and column) named.
    """
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, record in enumerate(reader, start=1):
            if has_header and line_no == 1:
                continue
            if not record:
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ValueError(
                    f"{path}: line {line_no} has {len(record)} fields, expected {width}"
                )
            values = np.empty(width)
            for col, cell in enumerate(record, start=1):
                try:
                    values[col - 1] = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at line {line_no}, column {col}"
                    ) from None
            if not np.all(np.isfinite(values)):
                raise ValueError(f"{path}: non-finite value at line {line_no}")
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.vstack(rows)


def load_row_exclusions(path) -> np.ndarray:
    """Read a row-exclusion list: one 0-based integer row index per line."""
    indices = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                indices.append(int(line))
            except ValueError:
                raise ValueError(
                    f"{path}: invalid row index {line!r} at line {line_no}"
                ) from None
    return np.array(sorted(set(indices)), dtype=int)


def exclude_rows(data, indices) -> np.ndarray:
    data = check_dataset(data)
    indices = np.asarray(indices, dtype=int)
    if indices.size and (indices.min() < 0 or indices.max() >= data.shape[0]):
        raise ValueError(f"row exclusion index out of range for N={data.shape[0]}")
    return np.delete(data, indices, axis=0)


def standardize(data) -> np.ndarray:
    """Shift and scale each column to zero mean and unit population variance.

    Variance uses denominator N, so the standardised sample has variance
    exactly 1.  Columns with zero variance are rejected by name.
    """
    data = check_dataset(data)
    if data.shape[0] < 2:
        raise ValueError("standardize requires at least 2 rows")
    mean = data.mean(axis=0)
    var = data.var(axis=0)  # ddof=0
    zero = np.flatnonzero(var == 0.0)
    if zero.size:
        raise ValueError(f"column {zero[0]} has zero variance")
    return (data - mean) / np.sqrt(var)


def deduplicate(data) -> np.ndarray:
    """Drop exact duplicate rows, keeping first occurrences in order.

    Duplicate means bitwise-identical row, so the result is deterministic.
    """
    data = check_dataset(data)
    seen = set()
    keep = []
    for i in range(data.shape[0]):
        key = data[i].tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return data[keep]


def bigaussian_generate(n_points: int, seed, weight: float = 0.5) -> np.ndarray:
    """Draw points from a two-mode Gaussian mixture restricted to [-1, 1]^2.

    The modes sit at (-0.8, 0.8) and (0.8, -0.8), each component has
    covariance I/2, and draws outside the square are rejected.  ``weight``
    is the probability of the first mode; the density is visually symmetric
    under (x, y) -> (-y, -x) at the default 1/2.
    """
    if n_points < 1:
        raise ValueError(f"n_points must be >= 1, got {n_points}")
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must be in [0, 1], got {weight}")
    rng = np.random.default_rng(seed)
    out = np.empty((n_points, 2))
    have = 0
    while have < n_points:
        m = max(2 * (n_points - have), 64)
        component = (rng.random(m) >= weight).astype(int)
        draws = _BIGAUSS_MODES[component] + _BIGAUSS_STD * rng.standard_normal((m, 2))
        inside = draws[np.all(np.abs(draws) <= 1.0, axis=1)]
        take = min(inside.shape[0], n_points - have)
        out[have : have + take] = inside[:take]
        have += take
    return out


def sample_initial(data, n: int, seed) -> np.ndarray:
    """Draw n distinct rows uniformly at random without replacement."""
    data = check_dataset(data)
    n_points = data.shape[0]
    if not 1 <= n <= n_points:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={n_points}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(n_points, size=n, replace=False)
    return data[idx].copy()

"""
Shared builders for the test suites
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from spmvtune.formats import CrsMatrix, dense_from_crs

PROJECT_ROOT = Path(__file__).parent.parent


def rng_for(seed):
    return np.random.Generator(np.random.PCG64(seed))


def random_crs(rng, n, nnz, shuffle_rows=True):
    """
    Random CRS with distinct positions and values in [-1, 1]

    With shuffle_rows the columns inside each row are left unsorted.
    """
    nnz = min(nnz, n * n)
    keys = np.sort(rng.choice(n * n, size=nnz, replace=False))
    rows, cols = keys // n, keys % n
    values = rng.uniform(-1.0, 1.0, size=nnz)
    counts = np.bincount(rows, minlength=n)
    row_ptr = np.concatenate(([0], np.cumsum(counts)))
    if shuffle_rows:
        for row in range(n):
            start, stop = row_ptr[row], row_ptr[row + 1]
            perm = start + rng.permutation(stop - start)
            cols[start:stop] = cols[perm]
            values[start:stop] = values[perm]
    return CrsMatrix(n, values, cols, row_ptr)


def random_matrix_suite(count, seed=0, max_n=200, max_nnz=5000):
    """count random matrices with n <= max_n and nnz <= max_nnz"""
    rng = rng_for(seed)
    matrices = []
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        nnz = int(rng.integers(0, min(max_nnz, n * n) + 1))
        matrices.append(random_crs(rng, n, nnz))
    return matrices


def dense_matvec(m, x):
    """Dense oracle y = A x"""
    return dense_from_crs(m).entries @ np.asarray(x, dtype=np.float64)


def crs_from_rows(n, rows):
    """CRS from a list of per-row [(col, value), ...] with 0-based columns"""
    values, cols, row_ptr = [], [], [0]
    for row in rows:
        for col, value in row:
            cols.append(col)
            values.append(value)
        row_ptr.append(len(values))
    return CrsMatrix(n, values, cols, row_ptr)


def tridiagonal(n):
    return crs_from_rows(n, [[(j, 1.0) for j in (i - 1, i, i + 1) if 0 <= j < n] for i in range(n)])


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path

"""
Storage Transformations
CRS to COO (row- and column-wise), CCS and ELL, plus the inverse paths

Every conversion returns fresh read-only objects and never mutates its
input. Conversions are serial and arithmetic-free: values are only moved.
"""

import logging

import numpy as np

from .errors import ConversionError, EllMemoryError
from .formats import (
    CcsMatrix,
    CooMatrix,
    CooOrdering,
    CrsMatrix,
    EllMatrix,
    VALUE_DTYPE,
    canonicalize,
    index_dtype_for,
)

logger = logging.getLogger(__name__)


def crs_to_coo_row(m):
    """Row-major triplets in CRS traversal order"""
    return CooMatrix(m.n, m.values, m.entry_rows(), m.col_idx, CooOrdering.ROW_MAJOR)


def _compress_transpose(n, values, minor, major_counts):
    """
    Regroup entries stored by major index into groups by minor index

    The three passes of the column-count algorithm: count entries per minor
    index, turn the counts into pointers with an exclusive prefix sum, then
    scatter every entry, in storage order, into the next free slot of its
    group. Storage order is kept inside each group, so the major indices
    come out ascending.
    """
    # Count the entries of every column
    counts = np.bincount(minor, minlength=n) if len(minor) else np.zeros(n, dtype=np.int64)

    # Set the pointers
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])

    # Scatter: a stable sort by group realizes "next free slot" order
    order = np.argsort(minor, kind="stable")
    major = np.repeat(np.arange(n, dtype=np.int64), major_counts)
    return values[order], major[order], ptr


def crs_to_ccs(m):
    """Phase I of the column-wise path: CRS to CCS"""
    values, row_idx, col_ptr = _compress_transpose(m.n, m.values, m.col_idx, m.row_counts())
    logger.debug(f"crs_to_ccs: n={m.n}, nnz={m.nnz}")
    return CcsMatrix(m.n, values, row_idx, col_ptr)


def ccs_to_crs(m):
    """Inverse of crs_to_ccs"""
    values, col_idx, row_ptr = _compress_transpose(m.n, m.values, m.row_idx, m.col_counts())
    return CrsMatrix(m.n, values, col_idx, row_ptr)


def ccs_to_coo_col(m):
    """Phase II of the column-wise path: expand column pointers"""
    return CooMatrix(m.n, m.values, m.row_idx, m.entry_cols(), CooOrdering.COL_MAJOR)


def crs_to_coo_col(m):
    return ccs_to_coo_col(crs_to_ccs(m))


def max_row_degree(m):
    counts = m.row_counts()
    return int(counts.max()) if len(counts) else 0


def estimate_ell_bytes(m, value_bytes=8, index_bytes=4):
    """n * nz * (value_bytes + index_bytes), exact integer arithmetic"""
    return m.n * max_row_degree(m) * (value_bytes + index_bytes)


def crs_to_ell(m, max_bytes=None):
    """
    Fill ELL bands from CRS rows, padding short rows

    Args:
        m: valid CrsMatrix
        max_bytes: footprint cap in bytes, None for unlimited

    Returns:
        EllMatrix whose band k of row i holds the row's k-th CRS entry

    Raises:
        EllMemoryError: the estimated footprint exceeds max_bytes
    """
    n = m.n
    nz = max_row_degree(m)
    index_dtype = index_dtype_for(n * nz)
    estimate = estimate_ell_bytes(m, np.dtype(VALUE_DTYPE).itemsize, np.dtype(index_dtype).itemsize)
    if max_bytes is not None and estimate > max_bytes:
        logger.info(f"crs_to_ell refused: n={n}, nz={nz}, estimate={estimate} bytes > cap={max_bytes}")
        raise EllMemoryError(estimate, max_bytes)

    rows = m.entry_rows()
    band = np.arange(m.nnz, dtype=np.int64) - m.row_ptr[rows]

    values = np.zeros((nz, n), dtype=VALUE_DTYPE)
    values[band, rows] = m.values
    # Padding column = the slot's own row
    col_idx = np.tile(np.arange(n, dtype=index_dtype), (nz, 1))
    col_idx[band, rows] = m.col_idx

    logger.debug(f"crs_to_ell: n={n}, nz={nz}, padding={n * nz - m.nnz}")
    return EllMatrix(n, nz, values, col_idx, m.row_counts())


def ell_to_crs(m):
    """Canonical CRS of the non-padding slots, chosen by per-row counts"""
    keep = ~m.padding_mask().T
    values = m.values.T[keep]
    col_idx = m.col_idx.T[keep]
    row_ptr = np.zeros(m.n + 1, dtype=np.int64)
    np.cumsum(m.row_counts, out=row_ptr[1:])
    return canonicalize(CrsMatrix(m.n, values, col_idx, row_ptr))


def coo_to_crs(m):
    """
    Canonical CRS of COO triplets in any ordering

    Raises:
        ConversionError: two triplets share a (row, col) position
    """
    rows = m.row_idx.astype(np.int64)
    cols = m.col_idx.astype(np.int64)
    keys = rows * m.n + cols
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    repeats = np.flatnonzero(sorted_keys[1:] == sorted_keys[:-1])
    if len(repeats):
        entry = int(order[repeats + 1].min())
        raise ConversionError(
            f"Duplicate COO entry at ({int(rows[entry]) + 1}, {int(cols[entry]) + 1}), entry {entry + 1}"
        )
    counts = np.bincount(rows, minlength=m.n) if m.nnz else np.zeros(m.n, dtype=np.int64)
    row_ptr = np.zeros(m.n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return CrsMatrix(m.n, m.values[order], cols[order], row_ptr)

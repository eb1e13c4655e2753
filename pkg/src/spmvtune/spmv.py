"""
SpMV Kernels
Sequential CRS baseline and the four lane-parallel COO/ELL kernels

Lanes run on a thread pool. Each lane reads the shared matrix and x and
writes only its own partial vector (COO kernels, ELL outer) or its own
row slice of y (ELL inner). Partial vectors are summed serially in
ascending lane order, so a fixed lane count gives bitwise-repeatable
results. With lanes = 1 no worker thread is started.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .convert import crs_to_coo_col, crs_to_coo_row, crs_to_ell
from .errors import DimensionError, FormatMismatchError, OrderingError
from .formats import VALUE_DTYPE, CooMatrix, CooOrdering, CrsMatrix, EllMatrix

logger = logging.getLogger(__name__)


class KernelVariant(str, Enum):
    """SpMV kernels; the CLI and profile files use the string values"""

    CRS = "crs"
    COO_ROW = "coo-row"
    COO_COL = "coo-col"
    ELL_INNER = "ell-inner"
    ELL_OUTER = "ell-outer"

    @property
    def is_ell(self):
        return self in (KernelVariant.ELL_INNER, KernelVariant.ELL_OUTER)


@dataclass(frozen=True)
class ThreadPartition:
    """
    Contiguous per-lane ranges over [1, range_len]

    istart/iend are 1-based and inclusive; an empty lane has istart > iend.
    """

    lanes: int
    istart: tuple
    iend: tuple
    range_len: int

    def chunks(self):
        """0-based half-open (start, stop) per lane"""
        return [(start - 1, end) for start, end in zip(self.istart, self.iend)]


@dataclass(frozen=True, eq=False)
class PartialResults:
    """Per-lane partial vectors, yy[k] belongs to lane k"""

    n: int
    lanes: int
    yy: np.ndarray


def partition_range(range_len, lanes):
    """
    Split [1, range_len] into near-equal contiguous chunks

    The first (range_len mod lanes) lanes receive one extra item.
    """
    if lanes < 1:
        raise ValueError(f"lanes must be at least 1, got {lanes}")
    base, extra = divmod(range_len, lanes)
    istart, iend = [], []
    start = 1
    for lane in range(lanes):
        size = base + (1 if lane < extra else 0)
        istart.append(start)
        iend.append(start + size - 1)
        start += size
    return ThreadPartition(lanes, tuple(istart), tuple(iend), range_len)


def reduce_partials(pr):
    """y[i] = sum over lanes of yy[k][i], lanes in ascending order"""
    y = np.zeros(pr.n, dtype=VALUE_DTYPE)
    for lane in range(pr.lanes):
        y += pr.yy[lane]
    return y


def _as_vector(x, n):
    x = np.asarray(x, dtype=VALUE_DTYPE)
    if x.shape != (n,):
        raise DimensionError(f"Vector has shape {x.shape}, expected ({n},)")
    return x


def _run_lanes(work, lanes, executor=None):
    """Run work(lane) for every lane; a barrier follows"""
    if lanes == 1:
        work(0)
        return
    if executor is not None:
        list(executor.map(work, range(lanes)))
        return
    with ThreadPoolExecutor(max_workers=lanes) as pool:
        list(pool.map(work, range(lanes)))


def spmv_crs(m, x):
    """Sequential row-wise baseline, left-to-right accumulation per row"""
    x = _as_vector(x, m.n)
    if m.nnz == 0:
        return np.zeros(m.n, dtype=VALUE_DTYPE)
    products = m.values * x[m.col_idx]
    return np.bincount(m.entry_rows(), weights=products, minlength=m.n)


def _spmv_coo_outer(m, x, lanes, ordering):
    if not isinstance(m, CooMatrix):
        raise FormatMismatchError(f"COO kernel needs a CooMatrix, got {type(m).__name__}")
    if m.ordering != ordering:
        raise OrderingError(f"Kernel requires {ordering.value} COO, got {m.ordering.value}")
    x = _as_vector(x, m.n)
    chunks = partition_range(m.nnz, lanes).chunks()
    yy = np.zeros((lanes, m.n), dtype=VALUE_DTYPE)

    def work(lane):
        start, stop = chunks[lane]
        if start >= stop:
            return
        rows = m.row_idx[start:stop]
        products = m.values[start:stop] * x[m.col_idx[start:stop]]
        yy[lane] = np.bincount(rows, weights=products, minlength=m.n)

    _run_lanes(work, lanes)
    return reduce_partials(PartialResults(m.n, lanes, yy))


def spmv_coo_col_outer(m, x, lanes=1):
    """Entry range of column-major COO split across lanes, then serial reduction"""
    return _spmv_coo_outer(m, x, lanes, CooOrdering.COL_MAJOR)


def spmv_coo_row_outer(m, x, lanes=1):
    """
    Entry range of row-major COO split across lanes, then serial reduction

    A chunk boundary can split a row between two lanes, so the private
    partial vectors are still needed.
    """
    return _spmv_coo_outer(m, x, lanes, CooOrdering.ROW_MAJOR)


def _require_ell(m):
    if not isinstance(m, EllMatrix):
        raise FormatMismatchError(f"ELL kernel needs an EllMatrix, got {type(m).__name__}")


def spmv_ell_inner(m, x, lanes=1):
    """
    Bands in serial order; the row loop of each band split across lanes

    Lanes own disjoint row slices of y, so there is no reduction buffer.
    """
    _require_ell(m)
    x = _as_vector(x, m.n)
    y = np.zeros(m.n, dtype=VALUE_DTYPE)
    chunks = partition_range(m.n, lanes).chunks()

    def band_work(band):
        def work(lane):
            start, stop = chunks[lane]
            if start < stop:
                y[start:stop] += m.values[band, start:stop] * x[m.col_idx[band, start:stop]]
        return work

    if lanes == 1:
        for band in range(m.nz):
            band_work(band)(0)
        return y

    with ThreadPoolExecutor(max_workers=lanes) as pool:
        for band in range(m.nz):
            _run_lanes(band_work(band), lanes, executor=pool)
    return y


def spmv_ell_outer(m, x, lanes=1):
    """
    Band range split across lanes, each lane sweeping all rows

    Parallelism is bounded by the band count; surplus lanes stay empty.
    Bands past the longest row hold only padding and are not visited.
    """
    _require_ell(m)
    x = _as_vector(x, m.n)
    occupied = int(m.row_counts.max()) if m.n else 0
    chunks = partition_range(min(m.nz, occupied), lanes).chunks()
    yy = np.zeros((lanes, m.n), dtype=VALUE_DTYPE)

    def work(lane):
        start, stop = chunks[lane]
        acc = yy[lane]
        for band in range(start, stop):
            acc += m.values[band] * x[m.col_idx[band]]

    _run_lanes(work, lanes)
    return reduce_partials(PartialResults(m.n, lanes, yy))


_KERNEL_FORMATS = {
    KernelVariant.CRS: CrsMatrix,
    KernelVariant.COO_ROW: CooMatrix,
    KernelVariant.COO_COL: CooMatrix,
    KernelVariant.ELL_INNER: EllMatrix,
    KernelVariant.ELL_OUTER: EllMatrix,
}


def run_kernel(kernel, matrix, x, lanes=1):
    """Dispatch to the kernel, refusing a matrix in the wrong format"""
    kernel = KernelVariant(kernel)
    expected = _KERNEL_FORMATS[kernel]
    if not isinstance(matrix, expected):
        raise FormatMismatchError(
            f"Kernel {kernel.value} runs on {expected.__name__}, got {type(matrix).__name__}"
        )
    if kernel == KernelVariant.CRS:
        return spmv_crs(matrix, x)
    if kernel == KernelVariant.COO_ROW:
        return spmv_coo_row_outer(matrix, x, lanes)
    if kernel == KernelVariant.COO_COL:
        return spmv_coo_col_outer(matrix, x, lanes)
    if kernel == KernelVariant.ELL_INNER:
        return spmv_ell_inner(matrix, x, lanes)
    return spmv_ell_outer(matrix, x, lanes)


def prepare_operand(m, kernel, max_bytes=None):
    """Convert a CRS matrix into the format the kernel runs on"""
    kernel = KernelVariant(kernel)
    if kernel == KernelVariant.CRS:
        return m
    if kernel == KernelVariant.COO_ROW:
        return crs_to_coo_row(m)
    if kernel == KernelVariant.COO_COL:
        return crs_to_coo_col(m)
    return crs_to_ell(m, max_bytes)


def relative_error(y, reference):
    """Max-norm relative error of y against reference"""
    y = np.asarray(y, dtype=VALUE_DTYPE)
    reference = np.asarray(reference, dtype=VALUE_DTYPE)
    if y.shape != reference.shape:
        raise DimensionError(f"Cannot compare shapes {y.shape} and {reference.shape}")
    if y.size == 0:
        return 0.0
    scale = float(np.max(np.abs(reference)))
    diff = float(np.max(np.abs(y - reference)))
    if scale == 0.0:
        return diff
    return diff / scale

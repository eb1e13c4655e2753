"""
Sparse Storage Formats
CRS, CCS, COO and ELL containers plus the dense oracle form

All containers hold 0-based, read-only numpy arrays. External data (the
from_one_based constructors, one_based accessors, validation messages and
Matrix Market files) is 1-based.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import MatrixValidationError, OracleCapError

logger = logging.getLogger(__name__)

VALUE_DTYPE = np.float64
ORACLE_CAP = 4096
_INT32_LIMIT = 2 ** 31 - 1


def index_dtype_for(count):
    """int32 indices unless a count no longer fits, then int64"""
    return np.int32 if count < _INT32_LIMIT else np.int64


def _frozen(data, dtype):
    array = np.array(data, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def _index_array(data, bound):
    array = np.asarray(data)
    if array.size and not np.issubdtype(array.dtype, np.integer):
        array = array.astype(np.int64)
    return _frozen(array, index_dtype_for(bound))


class CooOrdering(str, Enum):
    """Traversal order of COO triplets"""

    ROW_MAJOR = "row-major"
    COL_MAJOR = "col-major"
    UNORDERED = "unordered"


@dataclass(frozen=True, eq=False)
class CrsMatrix:
    """Compressed row storage of a square n x n matrix"""

    n: int
    values: np.ndarray
    col_idx: np.ndarray
    row_ptr: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "values", _frozen(self.values, VALUE_DTYPE))
        bound = max(len(self.values), self.n) + 1
        object.__setattr__(self, "col_idx", _index_array(self.col_idx, bound))
        object.__setattr__(self, "row_ptr", _index_array(self.row_ptr, bound))

    @classmethod
    def from_one_based(cls, n, values, col_idx, row_ptr):
        return cls(n, values, np.asarray(col_idx, dtype=np.int64) - 1,
                   np.asarray(row_ptr, dtype=np.int64) - 1)

    @classmethod
    def empty(cls, n):
        return cls(n, [], [], np.zeros(n + 1, dtype=np.int64))

    @property
    def nnz(self):
        return len(self.values)

    def one_based(self):
        """(values, col_idx, row_ptr) with 1-based indices"""
        return self.values.copy(), self.col_idx.astype(np.int64) + 1, self.row_ptr.astype(np.int64) + 1

    def row_counts(self):
        return np.diff(self.row_ptr.astype(np.int64))

    def entry_rows(self):
        """Row index of every stored entry, in storage order"""
        return np.repeat(np.arange(self.n, dtype=self.col_idx.dtype), self.row_counts())


@dataclass(frozen=True, eq=False)
class CcsMatrix:
    """Compressed column storage, the column-wise mirror of CrsMatrix"""

    n: int
    values: np.ndarray
    row_idx: np.ndarray
    col_ptr: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "values", _frozen(self.values, VALUE_DTYPE))
        bound = max(len(self.values), self.n) + 1
        object.__setattr__(self, "row_idx", _index_array(self.row_idx, bound))
        object.__setattr__(self, "col_ptr", _index_array(self.col_ptr, bound))

    @classmethod
    def from_one_based(cls, n, values, row_idx, col_ptr):
        return cls(n, values, np.asarray(row_idx, dtype=np.int64) - 1,
                   np.asarray(col_ptr, dtype=np.int64) - 1)

    @property
    def nnz(self):
        return len(self.values)

    def one_based(self):
        """(values, row_idx, col_ptr) with 1-based indices"""
        return self.values.copy(), self.row_idx.astype(np.int64) + 1, self.col_ptr.astype(np.int64) + 1

    def col_counts(self):
        return np.diff(self.col_ptr.astype(np.int64))

    def entry_cols(self):
        """Column index of every stored entry, in storage order"""
        return np.repeat(np.arange(self.n, dtype=self.row_idx.dtype), self.col_counts())


@dataclass(frozen=True, eq=False)
class CooMatrix:
    """Coordinate triplets with an ordering tag"""

    n: int
    values: np.ndarray
    row_idx: np.ndarray
    col_idx: np.ndarray
    ordering: CooOrdering = CooOrdering.UNORDERED

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "values", _frozen(self.values, VALUE_DTYPE))
        bound = max(len(self.values), self.n) + 1
        object.__setattr__(self, "row_idx", _index_array(self.row_idx, bound))
        object.__setattr__(self, "col_idx", _index_array(self.col_idx, bound))
        object.__setattr__(self, "ordering", CooOrdering(self.ordering))

    @classmethod
    def from_one_based(cls, n, values, row_idx, col_idx, ordering=CooOrdering.UNORDERED):
        return cls(n, values, np.asarray(row_idx, dtype=np.int64) - 1,
                   np.asarray(col_idx, dtype=np.int64) - 1, ordering)

    @property
    def nnz(self):
        return len(self.values)

    def one_based(self):
        """(values, row_idx, col_idx) with 1-based indices"""
        return (self.values.copy(), self.row_idx.astype(np.int64) + 1,
                self.col_idx.astype(np.int64) + 1)


@dataclass(frozen=True, eq=False)
class EllMatrix:
    """
    ELLPACK storage padded to nz bands

    values and col_idx have shape (nz, n); row-major reading of that array is
    the band-major linear layout, so band k of row i sits at offset n*k + i.
    row_counts records how many leading bands of each row are real entries;
    the remaining slots are padding (value 0.0, column = the row itself).
    """

    n: int
    nz: int
    values: np.ndarray
    col_idx: np.ndarray
    row_counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "nz", int(self.nz))
        shape = (self.nz, self.n)
        values = np.array(self.values, dtype=VALUE_DTYPE).reshape(shape)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        bound = max(self.n * self.nz, self.n) + 1
        col_idx = np.array(_index_array(self.col_idx, bound)).reshape(shape)
        col_idx.setflags(write=False)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "row_counts", _index_array(self.row_counts, bound))

    @property
    def stored_nnz(self):
        return int(self.row_counts.sum())

    @property
    def padding(self):
        return self.n * self.nz - self.stored_nnz

    def flat_values(self):
        return self.values.reshape(-1)

    def flat_col_idx(self):
        return self.col_idx.reshape(-1)

    def padding_mask(self):
        """True for padding slots, shape (nz, n)"""
        bands = np.arange(self.nz).reshape(-1, 1)
        return bands >= self.row_counts.reshape(1, -1)


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Dense n x n grid, used only as a test oracle"""

    n: int
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "entries", _frozen(self.entries, VALUE_DTYPE))


@dataclass(frozen=True, eq=False)
class RowHistogram:
    """Stored-entry count of every row"""

    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "counts", _frozen(self.counts, np.int64))

    @property
    def n(self):
        return len(self.counts)

    @property
    def nnz(self):
        return int(self.counts.sum())


@dataclass(frozen=True)
class EllFillStats:
    """Padding overhead of an ELL matrix"""

    stored_nnz: int
    padding: int
    slots: int
    fill_ratio: float


# ============================================================================
# Validation
# ============================================================================

def _check_pointer(ptr, n, nnz, name):
    errors = []
    if len(ptr) != n + 1:
        errors.append(f"{name} has length {len(ptr)}, expected {n + 1}")
        return errors
    if ptr[0] != 0:
        errors.append(f"{name}[1] = {int(ptr[0]) + 1}, expected 1")
    if ptr[n] != nnz:
        errors.append(f"{name}[{n + 1}] = {int(ptr[n]) + 1}, expected nnz + 1 = {nnz + 1}")
    for position in np.flatnonzero(np.diff(ptr.astype(np.int64)) < 0):
        errors.append(f"{name} not nondecreasing at position {position + 1}")
    return errors


def _check_range(indices, n, name):
    errors = []
    for entry in np.flatnonzero((indices < 0) | (indices >= n)):
        errors.append(f"{name} index {int(indices[entry]) + 1} out of range [1, {n}] at entry {entry + 1}")
    return errors


def _check_distinct(major, minor, n, major_name, minor_name):
    errors = []
    if len(major) == 0:
        return errors
    keys = major.astype(np.int64) * n + minor.astype(np.int64)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    for position in np.flatnonzero(sorted_keys[1:] == sorted_keys[:-1]):
        entry = order[position + 1]
        errors.append(
            f"duplicate {minor_name} {int(minor[entry]) + 1} in {major_name} {int(major[entry]) + 1} "
            f"at entry {entry + 1}"
        )
    return errors


def _check_compressed(n, values, indices, ptr, ptr_name, index_name, major_name):
    errors = []
    if n < 0:
        return [f"dimension n = {n} is negative"]
    nnz = len(values)
    if len(indices) != nnz:
        errors.append(f"{index_name} has length {len(indices)}, expected nnz = {nnz}")
    pointer_errors = _check_pointer(ptr, n, nnz, ptr_name)
    errors.extend(pointer_errors)
    range_errors = _check_range(indices, n, "row" if index_name == "row_idx" else "column")
    errors.extend(range_errors)
    if not pointer_errors and not range_errors and len(indices) == nnz:
        major = np.repeat(np.arange(n), np.diff(ptr.astype(np.int64)))
        minor_name = "row" if index_name == "row_idx" else "column"
        errors.extend(_check_distinct(major, indices, n, major_name, minor_name))
    return errors


def _validate_crs(m):
    return _check_compressed(m.n, m.values, m.col_idx, m.row_ptr, "row_ptr", "col_idx", "row")


def _validate_ccs(m):
    return _check_compressed(m.n, m.values, m.row_idx, m.col_ptr, "col_ptr", "row_idx", "column")


def _validate_coo(m):
    errors = []
    nnz = len(m.values)
    if len(m.row_idx) != nnz or len(m.col_idx) != nnz:
        return [f"COO sequences have lengths {nnz}, {len(m.row_idx)}, {len(m.col_idx)}; expected equal"]
    range_errors = _check_range(m.row_idx, m.n, "row") + _check_range(m.col_idx, m.n, "column")
    errors.extend(range_errors)
    if not range_errors:
        errors.extend(_check_distinct(m.row_idx, m.col_idx, m.n, "row", "column"))
    if m.ordering == CooOrdering.ROW_MAJOR:
        for position in np.flatnonzero(np.diff(m.row_idx.astype(np.int64)) < 0):
            errors.append(f"row_idx not nondecreasing at entry {position + 1} (ordering row-major)")
    elif m.ordering == CooOrdering.COL_MAJOR:
        for position in np.flatnonzero(np.diff(m.col_idx.astype(np.int64)) < 0):
            errors.append(f"col_idx not nondecreasing at entry {position + 1} (ordering col-major)")
    return errors


def _validate_ell(m):
    errors = []
    if len(m.row_counts) != m.n:
        return [f"row_counts has length {len(m.row_counts)}, expected n = {m.n}"]
    counts = m.row_counts.astype(np.int64)
    for row in np.flatnonzero((counts < 0) | (counts > m.nz)):
        errors.append(f"row {row + 1} stores {int(counts[row])} entries, outside [0, nz = {m.nz}]")
    expected_nz = int(counts.max()) if m.n else 0
    if m.nz != expected_nz:
        errors.append(f"nz = {m.nz}, expected the largest row count {expected_nz}")
    flat_cols = m.flat_col_idx()
    for entry in np.flatnonzero((flat_cols < 0) | (flat_cols >= m.n)):
        band, row = divmod(int(entry), m.n)
        errors.append(f"column index {int(flat_cols[entry]) + 1} out of range [1, {m.n}] "
                      f"at band {band + 1}, row {row + 1}")
    if not errors:
        mask = m.padding_mask()
        bands, rows = np.nonzero(mask & (m.values != 0.0))
        for band, row in zip(bands, rows):
            errors.append(f"padding value {float(m.values[band, row])!r} is not 0.0 at band {band + 1}, row {row + 1}")
    return errors


def _validate_dense(m):
    if m.entries.shape != (m.n, m.n):
        return [f"dense entries have shape {m.entries.shape}, expected ({m.n}, {m.n})"]
    return []


_VALIDATORS = {
    CrsMatrix: _validate_crs,
    CcsMatrix: _validate_ccs,
    CooMatrix: _validate_coo,
    EllMatrix: _validate_ell,
    DenseMatrix: _validate_dense,
}


def validate(m):
    """
    Check every storage invariant of a matrix

    Args:
        m: CrsMatrix, CcsMatrix, CooMatrix, EllMatrix or DenseMatrix

    Returns:
        tuple: (is_valid, violations) where violations name their 1-based location
    """
    try:
        check = _VALIDATORS[type(m)]
    except KeyError:
        raise TypeError(f"Cannot validate object of type {type(m).__name__}")
    violations = check(m)
    return len(violations) == 0, violations


def ensure_valid(m):
    """Return m unchanged or raise MatrixValidationError"""
    is_valid, violations = validate(m)
    if not is_valid:
        raise MatrixValidationError(violations)
    return m


# ============================================================================
# Helpers
# ============================================================================

def row_histogram(m):
    return RowHistogram(m.row_counts())


def canonicalize(m):
    """Same matrix with columns ascending inside every row"""
    rows = m.entry_rows()
    order = np.lexsort((m.col_idx, rows))
    return CrsMatrix(m.n, m.values[order], m.col_idx[order], m.row_ptr)


def structurally_equal(a, b):
    """Same format, dimension, index arrays and bitwise-equal values"""
    if type(a) is not type(b) or a.n != b.n:
        return False
    if isinstance(a, CrsMatrix):
        pairs = [(a.row_ptr, b.row_ptr), (a.col_idx, b.col_idx), (a.values, b.values)]
    elif isinstance(a, CcsMatrix):
        pairs = [(a.col_ptr, b.col_ptr), (a.row_idx, b.row_idx), (a.values, b.values)]
    elif isinstance(a, CooMatrix):
        if a.ordering != b.ordering:
            return False
        pairs = [(a.row_idx, b.row_idx), (a.col_idx, b.col_idx), (a.values, b.values)]
    elif isinstance(a, EllMatrix):
        if a.nz != b.nz:
            return False
        pairs = [(a.row_counts, b.row_counts), (a.col_idx, b.col_idx), (a.values, b.values)]
    elif isinstance(a, DenseMatrix):
        pairs = [(a.entries, b.entries)]
    else:
        raise TypeError(f"Cannot compare objects of type {type(a).__name__}")
    return all(np.array_equal(x, y) for x, y in pairs)


def _check_oracle_cap(n, max_n):
    if n > max_n:
        raise OracleCapError(f"Dense oracle refused: n = {n} exceeds the oracle cap of {max_n}")


def dense_from_crs(m, max_n=ORACLE_CAP):
    """Dense grid with each stored value at (row, col)"""
    _check_oracle_cap(m.n, max_n)
    entries = np.zeros((m.n, m.n), dtype=VALUE_DTYPE)
    entries[m.entry_rows(), m.col_idx] = m.values
    return DenseMatrix(m.n, entries)


def crs_from_dense(d, drop_tol=0.0, max_n=ORACLE_CAP):
    """CRS of the entries with |v| > drop_tol, columns ascending within rows"""
    _check_oracle_cap(d.n, max_n)
    rows, cols = np.nonzero(np.abs(d.entries) > drop_tol)
    counts = np.bincount(rows, minlength=d.n)
    row_ptr = np.concatenate(([0], np.cumsum(counts)))
    return CrsMatrix(d.n, d.entries[rows, cols], cols, row_ptr)


def ell_fill_stats(m):
    slots = m.n * m.nz
    stored = m.stored_nnz
    fill_ratio = slots / stored if stored else 1.0
    return EllFillStats(stored_nnz=stored, padding=slots - stored, slots=slots, fill_ratio=fill_ratio)


def crs_nbytes(m):
    return m.values.nbytes + m.col_idx.nbytes + m.row_ptr.nbytes


def ell_nbytes(m):
    return m.values.nbytes + m.col_idx.nbytes + m.row_counts.nbytes

"""
Matrix Market I/O
Coordinate real matrices, general and symmetric kinds
"""

import logging
from pathlib import Path

import numpy as np

from ..errors import IngestError
from ..formats import CrsMatrix, canonicalize

logger = logging.getLogger(__name__)

GENERAL_HEADER = "%%MatrixMarket matrix coordinate real general"
SUPPORTED_SYMMETRY = ("general", "symmetric")


def _parse_header(line, path):
    tokens = line.strip().split()
    if len(tokens) != 5 or tokens[0] != "%%MatrixMarket":
        raise IngestError("missing or malformed %%MatrixMarket header", path, 1)
    obj, fmt, field, symmetry = (token.lower() for token in tokens[1:])
    if obj != "matrix":
        raise IngestError(f"unsupported object '{obj}'", path, 1)
    if fmt != "coordinate":
        raise IngestError(f"unsupported format '{fmt}', only coordinate is read", path, 1)
    if field != "real":
        raise IngestError(f"unsupported field '{field}', only real is read", path, 1)
    if symmetry not in SUPPORTED_SYMMETRY:
        raise IngestError(f"unsupported symmetry '{symmetry}'", path, 1)
    return symmetry


def _parse_ints(tokens, count, what, path, line_number):
    if len(tokens) < count:
        raise IngestError(f"{what} line needs {count} fields, found {len(tokens)}", path, line_number)
    try:
        return [int(token) for token in tokens[:count]]
    except ValueError:
        raise IngestError(f"{what} line has non-integer fields", path, line_number)


def read_matrix_market(path):
    """
    Read a coordinate real Matrix Market file into CRS

    Symmetric files are expanded to both triangles. Entries are grouped by
    row and keep file order inside each row.

    Raises:
        IngestError: unsupported header, non-square size, bad, duplicate or
            out-of-range entries, or an entry count that disagrees with the size line
    """
    path = Path(path)
    rows, cols, values = [], [], []
    seen = set()

    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except UnicodeDecodeError as e:
        raise IngestError(f"not UTF-8 text (bad byte at offset {e.start})", path)

    symmetry = _parse_header(lines[0] if lines else "", path)
    n = None
    declared = 0
    read_entries = 0
    for line_number, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        tokens = stripped.split()
        if n is None:
            n_rows, n_cols, declared = _parse_ints(tokens, 3, "size", path, line_number)
            if n_rows < 0 or n_cols < 0 or declared < 0:
                raise IngestError(f"negative size {n_rows} x {n_cols} with {declared} entries", path, line_number)
            if n_rows != n_cols:
                raise IngestError(f"non-square matrix {n_rows} x {n_cols}", path, line_number)
            n = n_rows
            continue

        i, j = _parse_ints(tokens, 2, "entry", path, line_number)
        if len(tokens) != 3:
            raise IngestError(f"entry line needs 3 fields, found {len(tokens)}", path, line_number)
        try:
            value = float(tokens[2])
        except ValueError:
            raise IngestError(f"entry value '{tokens[2]}' is not a real number", path, line_number)
        if not (1 <= i <= n and 1 <= j <= n):
            raise IngestError(f"entry ({i}, {j}) out of range [1, {n}]", path, line_number)
        read_entries += 1
        if read_entries > declared:
            raise IngestError(f"more entries than the {declared} declared", path, line_number)

        pairs = [(i, j)]
        if symmetry == "symmetric" and i != j:
            pairs.append((j, i))
        for row, col in pairs:
            key = (row, col)
            if key in seen:
                raise IngestError(f"duplicate entry ({row}, {col})", path, line_number)
            seen.add(key)
            rows.append(row - 1)
            cols.append(col - 1)
            values.append(value)

    if n is None:
        raise IngestError("missing size line", path)
    if read_entries != declared:
        raise IngestError(f"found {read_entries} entries, {declared} declared", path)

    rows = np.asarray(rows, dtype=np.int64)
    order = np.argsort(rows, kind="stable")
    counts = np.bincount(rows, minlength=n) if len(rows) else np.zeros(n, dtype=np.int64)
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    matrix = CrsMatrix(n, np.asarray(values)[order], np.asarray(cols, dtype=np.int64)[order], row_ptr)
    logger.info(f"Read {path}: n={n}, nnz={matrix.nnz} ({symmetry})")
    return matrix


def write_coordinate(path, n, row_idx, col_idx, values):
    """
    Write 0-based triplets as a general coordinate file, in the given order

    Values carry 17 significant digits.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(GENERAL_HEADER + "\n")
        f.write(f"{n} {n} {len(values)}\n")
        for row, col, value in zip(np.asarray(row_idx).tolist(), np.asarray(col_idx).tolist(),
                                   np.asarray(values).tolist()):
            f.write(f"{row + 1} {col + 1} {value:.17g}\n")
    logger.info(f"Wrote {path}: n={n}, nnz={len(values)}")


def write_matrix_market(m, path):
    """Write canonical row-major general coordinate format"""
    canonical = canonicalize(m)
    write_coordinate(path, m.n, canonical.entry_rows(), canonical.col_idx, canonical.values)

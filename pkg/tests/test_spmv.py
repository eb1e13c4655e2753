"""
Tests for the SpMV kernels, lane partitioning and reduction
"""

import unittest
import sys
from pathlib import Path
from unittest import mock

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).parent.parent))

from spmvtune import spmv
from spmvtune.convert import crs_to_coo_col, crs_to_coo_row, crs_to_ell
from spmvtune.errors import DimensionError, FormatMismatchError, OrderingError
from spmvtune.formats import CrsMatrix, EllMatrix
from spmvtune.spmv import (
    KernelVariant,
    PartialResults,
    partition_range,
    prepare_operand,
    reduce_partials,
    relative_error,
    run_kernel,
    spmv_coo_col_outer,
    spmv_coo_row_outer,
    spmv_crs,
    spmv_ell_inner,
    spmv_ell_outer,
)
from tests.helpers import crs_from_rows, dense_matvec, random_crs, rng_for, tridiagonal

LANE_COUNTS = (1, 2, 3, 4, 7, 8, 16)


def identity(n):
    return CrsMatrix.from_one_based(n, [1.0] * n, list(range(1, n + 1)), list(range(1, n + 2)))


class TestPartition(unittest.TestCase):
    """Contiguous near-equal chunks over [1, range_len]"""

    def test_single_lane(self):
        p = partition_range(10, 1)
        self.assertEqual(p.istart, (1,))
        self.assertEqual(p.iend, (10,))

    def test_balanced_split(self):
        p = partition_range(10, 3)
        self.assertEqual(list(zip(p.istart, p.iend)), [(1, 4), (5, 7), (8, 10)])

    def test_empty_lanes(self):
        p = partition_range(2, 4)
        self.assertEqual(list(zip(p.istart, p.iend)), [(1, 1), (2, 2), (3, 2), (3, 2)])
        self.assertEqual(p.chunks(), [(0, 1), (1, 2), (2, 2), (2, 2)])

    def test_zero_lanes_refused(self):
        with self.assertRaises(ValueError):
            partition_range(5, 0)

    def test_cover_invariant(self):
        for range_len in range(0, 40):
            for lanes in range(1, 12):
                p = partition_range(range_len, lanes)
                sizes = [end - start + 1 for start, end in zip(p.istart, p.iend)]
                self.assertEqual(sum(sizes), range_len)
                self.assertLessEqual(max(sizes) - min(sizes), 1)
                self.assertEqual(p.istart[0], 1)
                for lane in range(1, lanes):
                    self.assertEqual(p.istart[lane], p.iend[lane - 1] + 1)


class TestReduce(unittest.TestCase):
    """Serial reduction of the per-lane partial vectors"""

    def test_single_lane(self):
        yy = np.array([[1.0, 2.0, 3.0]])
        np.testing.assert_array_equal(reduce_partials(PartialResults(3, 1, yy)), [1.0, 2.0, 3.0])

    def test_disjoint_supports(self):
        yy = np.array([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_array_equal(reduce_partials(PartialResults(2, 2, yy)), [1.0, 1.0])

    def test_brute_force(self):
        rng = rng_for(1)
        yy = rng.uniform(-1, 1, size=(5, 7))
        expected = np.zeros(7)
        for i in range(7):
            for k in range(5):
                expected[i] += yy[k, i]
        np.testing.assert_array_equal(reduce_partials(PartialResults(7, 5, yy)), expected)


class TestCrsBaseline(unittest.TestCase):
    """Sequential CRS kernel"""

    def test_identity(self):
        x = np.array([0.5, -1.0, 2.0])
        np.testing.assert_array_equal(spmv_crs(identity(3), x), x)

    def test_by_hand(self):
        m = CrsMatrix.from_one_based(2, [2.0, 3.0], [2, 1], [1, 2, 3])
        np.testing.assert_array_equal(spmv_crs(m, [1.0, 1.0]), [2.0, 3.0])

    def test_zero_matrix(self):
        np.testing.assert_array_equal(spmv_crs(CrsMatrix.empty(4), np.ones(4)), np.zeros(4))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            spmv_crs(identity(3), np.ones(4))


class TestParallelKernels(unittest.TestCase):
    """COO and ELL kernels against the oracles"""

    def setUp(self):
        self.matrices = [random_crs(rng_for(seed), n, nnz)
                         for seed, (n, nnz) in enumerate([(1, 1), (5, 3), (17, 60), (64, 900), (120, 2000)])]

    def _all_kernels(self, m, x, lanes):
        return {
            "coo-row": spmv_coo_row_outer(crs_to_coo_row(m), x, lanes),
            "coo-col": spmv_coo_col_outer(crs_to_coo_col(m), x, lanes),
            "ell-inner": spmv_ell_inner(crs_to_ell(m), x, lanes),
            "ell-outer": spmv_ell_outer(crs_to_ell(m), x, lanes),
        }

    def test_identity_any_lanes(self):
        x = np.arange(1.0, 6.0)
        for lanes in (1, 2, 4):
            for name, y in self._all_kernels(identity(5), x, lanes).items():
                np.testing.assert_array_equal(y, x, err_msg=name)

    def test_dense_oracle(self):
        rng = rng_for(2)
        for m in self.matrices:
            x = rng.uniform(-1, 1, size=m.n)
            reference = dense_matvec(m, x)
            for lanes in (1, 3, 8):
                for name, y in self._all_kernels(m, x, lanes).items():
                    self.assertLessEqual(relative_error(y, reference), 1e-10, f"{name} lanes={lanes}")

    def test_lane_invariance(self):
        m = self.matrices[3]
        x = rng_for(3).uniform(-1, 1, size=m.n)
        single = self._all_kernels(m, x, 1)
        for lanes in LANE_COUNTS:
            for name, y in self._all_kernels(m, x, lanes).items():
                self.assertLessEqual(relative_error(y, single[name]), 1e-12, f"{name} lanes={lanes}")

    def test_determinism(self):
        m = self.matrices[4]
        x = rng_for(4).uniform(-1, 1, size=m.n)
        first = self._all_kernels(m, x, 4)
        second = self._all_kernels(m, x, 4)
        for name in first:
            np.testing.assert_array_equal(first[name], second[name])

    def test_ell_kernels_agree(self):
        for m in self.matrices:
            x = rng_for(5).uniform(-1, 1, size=m.n)
            ell = crs_to_ell(m)
            self.assertLessEqual(relative_error(spmv_ell_inner(ell, x, 3), spmv_ell_outer(ell, x, 2)), 1e-12)

    def test_more_lanes_than_entries(self):
        m = crs_from_rows(4, [[(0, 1.0)], [(2, 2.0)], [], [(3, -1.0)]])
        x = np.array([1.0, 2.0, 3.0, 4.0])
        expected = spmv_crs(m, x)
        np.testing.assert_array_equal(spmv_coo_col_outer(crs_to_coo_col(m), x, 8), expected)
        np.testing.assert_array_equal(spmv_coo_row_outer(crs_to_coo_row(m), x, 8), expected)

    def test_ell_padding_by_hand(self):
        a, b, c = 2.0, 3.0, 5.0
        m = CrsMatrix.from_one_based(2, [a, b, c], [1, 2, 1], [1, 3, 4])
        x = np.array([7.0, 11.0])
        ell = crs_to_ell(m)
        expected = [a * x[0] + b * x[1], c * x[0]]
        np.testing.assert_array_equal(spmv_ell_inner(ell, x, 2), expected)
        np.testing.assert_array_equal(spmv_ell_outer(ell, x, 2), expected)

    def test_ell_outer_tridiagonal_one_band_per_lane(self):
        m = tridiagonal(50)
        x = rng_for(6).uniform(-1, 1, size=50)
        self.assertLessEqual(relative_error(spmv_ell_outer(crs_to_ell(m), x, 3), dense_matvec(m, x)), 1e-12)

    def test_padding_neutrality(self):
        m = random_crs(rng_for(7), 30, 100)
        x = rng_for(8).uniform(-1, 1, size=30)
        ell = crs_to_ell(m)
        extra = 3
        pad_values = np.vstack([ell.values, np.zeros((extra, ell.n))])
        pad_cols = np.vstack([ell.col_idx, np.tile(np.arange(ell.n), (extra, 1))])
        padded = EllMatrix(ell.n, ell.nz + extra, pad_values, pad_cols, ell.row_counts)
        for lanes in (1, 2, 4):
            np.testing.assert_array_equal(spmv_ell_inner(padded, x, lanes), spmv_ell_inner(ell, x, lanes))
            np.testing.assert_array_equal(spmv_ell_outer(padded, x, lanes), spmv_ell_outer(ell, x, lanes))

    def test_single_lane_spawns_no_worker(self):
        m = random_crs(rng_for(9), 20, 60)
        x = np.ones(20)
        with mock.patch.object(spmv, "ThreadPoolExecutor", side_effect=AssertionError("worker spawned")):
            spmv_coo_row_outer(crs_to_coo_row(m), x, 1)
            spmv_coo_col_outer(crs_to_coo_col(m), x, 1)
            spmv_ell_inner(crs_to_ell(m), x, 1)
            spmv_ell_outer(crs_to_ell(m), x, 1)


class TestContracts(unittest.TestCase):
    """Format and ordering checks"""

    def test_ordering_refused(self):
        m = identity(3)
        with self.assertRaises(OrderingError):
            spmv_coo_col_outer(crs_to_coo_row(m), np.ones(3), 2)
        with self.assertRaises(OrderingError):
            spmv_coo_row_outer(crs_to_coo_col(m), np.ones(3), 2)

    def test_format_mismatch(self):
        with self.assertRaises(FormatMismatchError):
            run_kernel(KernelVariant.ELL_OUTER, identity(3), np.ones(3))
        with self.assertRaises(FormatMismatchError):
            spmv_ell_inner(identity(3), np.ones(3))

    def test_run_kernel_dispatch(self):
        m = random_crs(rng_for(10), 25, 80)
        x = rng_for(11).uniform(-1, 1, size=25)
        reference = spmv_crs(m, x)
        for kernel in KernelVariant:
            y = run_kernel(kernel, prepare_operand(m, kernel), x, 2)
            self.assertLessEqual(relative_error(y, reference), 1e-12, kernel.value)

    def test_is_ell(self):
        self.assertTrue(KernelVariant.ELL_INNER.is_ell)
        self.assertFalse(KernelVariant("coo-row").is_ell)

    def test_relative_error(self):
        self.assertEqual(relative_error([1.0, 2.0], [1.0, 2.0]), 0.0)
        self.assertAlmostEqual(relative_error([1.0, 2.5], [1.0, 2.0]), 0.25)
        with self.assertRaises(DimensionError):
            relative_error([1.0], [1.0, 2.0])


if __name__ == '__main__':
    unittest.main()

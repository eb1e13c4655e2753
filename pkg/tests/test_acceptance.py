"""
End-to-end acceptance suites: kernels and conversions against oracles,
cost model examples, D_mat, threshold rule, profiling rehearsal, memory
guard, reference statistics and profile persistence
"""

import csv
import io
import math
import os
import tempfile
import unittest
import sys
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).parent.parent))

from cli import spmvtune as cli
from spmvtune.autotune import Timings, amortization_iterations, check_profile, compute_metrics, find_d_star
from spmvtune.convert import coo_to_crs, crs_to_ccs, crs_to_coo_col, crs_to_coo_row, crs_to_ell, ell_to_crs
from spmvtune.errors import EllMemoryError
from spmvtune.formats import CrsMatrix, canonicalize, structurally_equal
from spmvtune.ingest import gen_banded, write_matrix_market
from spmvtune.profile_store import read_profile, write_profile
from spmvtune.spmv import KernelVariant, prepare_operand, relative_error, run_kernel
from spmvtune.stats import row_stats_from_histogram
from tests.helpers import PROJECT_ROOT, crs_from_rows, dense_matvec, random_matrix_suite, rng_for
from tests.test_autotune import brute_force_d_star
from tests.test_profile_store import random_profile

FIXTURES_DIR = Path(__file__).parent / "fixtures"
SUITE_LANES = (1, 2, 3, 4, 8)


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main([str(arg) for arg in argv])
    return code, out.getvalue(), err.getvalue()


class TestKernelSuite(unittest.TestCase):
    """200 random matrices, every kernel, every lane count, against the dense oracle"""

    def test_all_kernels(self):
        rng = rng_for(100)
        failures = []
        for index, m in enumerate(random_matrix_suite(200, seed=1)):
            x = rng.uniform(-1.0, 1.0, size=m.n)
            reference = dense_matvec(m, x)
            for kernel in KernelVariant:
                operand = prepare_operand(m, kernel)
                for lanes in SUITE_LANES:
                    error = relative_error(run_kernel(kernel, operand, x, lanes), reference)
                    if not error <= 1e-10:
                        failures.append((index, kernel.value, lanes, error))
        self.assertEqual(failures, [])


class TestConversionSuite(unittest.TestCase):
    """Arithmetic-free conversions reproduce the canonical input exactly"""

    def test_round_trips(self):
        failures = []
        for index, m in enumerate(random_matrix_suite(200, seed=1)):
            expected = canonicalize(m)
            first = crs_to_ccs(m)
            second = crs_to_ccs(CrsMatrix(first.n, first.values, first.row_idx, first.col_ptr))
            candidates = {
                "coo-row": coo_to_crs(crs_to_coo_row(m)),
                "coo-col": coo_to_crs(crs_to_coo_col(m)),
                "ell": canonicalize(ell_to_crs(crs_to_ell(m))),
                "ccs-twice": CrsMatrix(second.n, second.values, second.row_idx, second.col_ptr),
            }
            failures.extend((index, name) for name, got in candidates.items()
                            if not structurally_equal(got, expected))
        self.assertEqual(failures, [])


class TestCostModelExamples(unittest.TestCase):
    """Break-even examples of the cost model"""

    def test_examples(self):
        for timings, iterations in ((Timings(1.0, 0.1, 10.0), 12), (Timings(1.0, 0.001, 1000.0), 1002)):
            self.assertEqual(compute_metrics(timings).r, 1.0)
            k = 1
            while timings.t_trans + k * timings.t_ell > k * timings.t_crs:
                k += 1
            self.assertEqual(k, iterations)
            self.assertEqual(amortization_iterations(timings), iterations)


class TestDmatSuite(unittest.TestCase):
    """Exact moments against a two-pass oracle"""

    def test_random_histograms(self):
        rng = rng_for(4)
        for _ in range(100):
            size = int(10 ** rng.uniform(0, 6))
            counts = rng.integers(0, int(rng.integers(1, 500)), size=size)
            counts[0] += 1
            stats = row_stats_from_histogram(counts)
            values = counts.astype(np.float64)
            mu = values.sum() / size
            sigma = math.sqrt(np.sum((values - mu) ** 2) / size)
            self.assertTrue(math.isclose(stats.mu, mu, rel_tol=1e-12))
            self.assertTrue(math.isclose(stats.sigma, sigma, rel_tol=1e-12, abs_tol=1e-12))
            self.assertTrue(math.isclose(stats.d_mat, sigma / mu, rel_tol=1e-12, abs_tol=1e-12))

    def test_exact_cases(self):
        self.assertEqual(row_stats_from_histogram([7] * 1000).d_mat, 0.0)
        self.assertEqual(row_stats_from_histogram([1, 3]).d_mat, 0.5)


class TestThresholdSuite(unittest.TestCase):
    """find_d_star against the brute-force scan, monotone in c"""

    def test_random_record_sets(self):
        rng = rng_for(5)
        for _ in range(1000):
            size = int(rng.integers(0, 51))
            records = list(zip(rng.uniform(0, 6, size).tolist(), rng.uniform(0, 5, size).tolist()))
            results = []
            for c in (0.5, 1.0, 2.0):
                d_star = find_d_star(records, c)
                self.assertEqual(d_star, brute_force_d_star(records, c))
                results.append(d_star)
            self.assertEqual(results, sorted(results, reverse=True))


class TestProfilingRehearsal(unittest.TestCase):
    """Shipped benchmark sweep through the CLI, then an on-line decision"""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.dir = Path(self.temp_dir.name)
        self.banded = self.dir / "fresh-band.mtx"
        write_matrix_market(gen_banded(20_000, 3, wrap=True), self.banded)

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_rehearsal(self):
        manifest = PROJECT_ROOT / "data" / "benchmark_set.yaml"
        for lanes in sorted({1, os.cpu_count() or 1}):
            profile_path = self.dir / f"profile-{lanes}.json"
            code, out, err = run_cli("profile", manifest, "--lanes", lanes, "--repeats", 3, "--out", profile_path)
            self.assertEqual(code, 0, err)

            profile = read_profile(profile_path)
            self.assertEqual(len(profile.records), 12)
            self.assertEqual(profile.lanes, lanes)
            self.assertTrue(check_profile(profile)[0])
            pairs = [(r.stats.d_mat, r.metrics.r) for r in profile.included_records()]
            self.assertEqual(profile.d_star, brute_force_d_star(pairs, profile.c))

            code, out, _ = run_cli("select", self.banded, "--profile", profile_path)
            self.assertEqual(code, 0)
            if profile.d_star > 0:
                self.assertTrue(out.startswith("UseEll"), out)
            else:
                self.assertTrue(out.startswith("UseCrs"), out)


class TestMemoryGuard(unittest.TestCase):
    """One very long row under a 100 MB cap"""

    def test_refused_and_excluded(self):
        n, heavy = 10_000, 5_000
        m = crs_from_rows(n, [[(j, 1.0) for j in range(heavy)]] + [[(i, 1.0)] for i in range(1, n)])
        cap = 100 * 1024 * 1024
        with self.assertRaises(EllMemoryError):
            crs_to_ell(m, max_bytes=cap)

        with tempfile.TemporaryDirectory() as temp_dir:
            directory = Path(temp_dir)
            write_matrix_market(m, directory / "long-row.mtx")
            write_matrix_market(gen_banded(500, 1), directory / "band.mtx")
            code, _, err = run_cli("profile", directory, "--repeats", 1, "--max-bytes", cap,
                                   "--out", directory / "profile.json")
            self.assertEqual(code, 0, err)
            records = {r.matrix_id: r for r in read_profile(directory / "profile.json").records}
        self.assertTrue(records["long-row"].excluded)
        self.assertIn("exceeds the cap", records["long-row"].exclusion_reason)
        self.assertFalse(records["band"].excluded)


class TestReferenceStatistics(unittest.TestCase):
    """Collection matrices, when their files are present"""

    def info_row(self, path):
        code, out, _ = run_cli("info", path, "--csv")
        self.assertEqual(code, 0)
        header, row = list(csv.reader(io.StringIO(out)))
        return dict(zip(header, row))

    def test_memplus(self):
        path = FIXTURES_DIR / "memplus.mtx"
        if not path.exists():
            self.skipTest("memplus.mtx not in tests/fixtures")
        row = self.info_row(path)
        for column, expected in (("mu", 7.10), ("sigma", 22.03), ("d_mat", 3.10)):
            self.assertLessEqual(abs(float(row[column]) - expected), 0.01 * expected, column)

    def test_chem_master1(self):
        path = FIXTURES_DIR / "chem_master1.mtx"
        if not path.exists():
            self.skipTest("chem_master1.mtx not in tests/fixtures")
        self.assertLessEqual(abs(float(self.info_row(path)["mu"]) - 4.98), 0.01 * 4.98)


class TestPersistenceSuite(unittest.TestCase):
    """100 random profiles survive write-then-read bit for bit"""

    def test_round_trips(self):
        rng = rng_for(9)
        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "profile.json"
            for _ in range(100):
                profile = random_profile(rng, int(rng.integers(1, 20)))
                write_profile(profile, path)
                restored = read_profile(path)
                self.assertEqual(restored, profile)
                self.assertEqual(restored.d_star.hex(), profile.d_star.hex())


if __name__ == '__main__':
    unittest.main()

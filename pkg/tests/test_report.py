"""
Tests for the markdown / HTML profile report
"""

import tempfile
import unittest
import sys
from pathlib import Path

import frontmatter

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).parent.parent))

from generators.report_generator import ReportGenerator, write_report
from spmvtune.autotune import BenchRecord, Profile, Timings, compute_metrics, find_d_star
from spmvtune.spmv import KernelVariant
from spmvtune.stats import RowStats


def record(matrix_id, d_mat, timings):
    return BenchRecord(matrix_id, 100, 500, RowStats(5.0, 5.0 * d_mat, d_mat), timings,
                       compute_metrics(timings), KernelVariant.ELL_INNER, 1)


def sample_profile():
    records = (
        record("irregular", 2.5, Timings(1.0, 2.0, 10.0)),
        record("banded", 0.02, Timings(1.0, 0.1, 10.0)),
        record("mesh", 0.4, Timings(1.0, 0.5, 4.0)),
        BenchRecord("huge", 1000, 900_000, RowStats(900.0, 5000.0, 5.5), Timings(0.2), None,
                    KernelVariant.ELL_INNER, 1, True, "ELL footprint estimate 1 bytes exceeds the cap of 0 bytes"),
    )
    pairs = [(r.stats.d_mat, r.metrics.r) for r in records if not r.excluded]
    return Profile("bench-host", KernelVariant.ELL_INNER, 1, 1.0, records, find_d_star(pairs, 1.0))


class TestReportGenerator(unittest.TestCase):
    """Rendering a profile"""

    def setUp(self):
        self.generator = ReportGenerator()
        self.profile = sample_profile()

    def test_metadata_block(self):
        post = frontmatter.loads(self.generator.render_markdown(self.profile))
        self.assertEqual(post['machine_label'], "bench-host")
        self.assertEqual(post['kernel_variant'], "ell-inner")
        self.assertEqual(post['d_star'], self.profile.d_star)
        self.assertEqual(post['records'], 4)
        self.assertEqual(post['excluded'], 1)

    def test_rows_sorted_by_d_mat(self):
        text = self.generator.render_markdown(self.profile)
        positions = [text.index(f"| {name} |") for name in ("banded", "mesh", "irregular")]
        self.assertEqual(positions, sorted(positions))

    def test_row_content(self):
        text = self.generator.render_markdown(self.profile)
        # sp 10, tt 10, r 1, pays off after 12 products
        self.assertIn("| banded | 100 | 500 | 0.02 | 10 | 10 | 1 | yes | 12 |", text)
        # slower than CRS: never amortized
        self.assertIn("| irregular | 100 | 500 | 2.5 | 0.5 | 10 | 0.05 | no | never |", text)

    def test_excluded_section(self):
        text = self.generator.render_markdown(self.profile)
        self.assertIn("## Excluded Matrices", text)
        self.assertIn("| huge | 1000 | 900000 | 5.5 | ELL footprint estimate", text)

    def test_no_excluded_section_when_none(self):
        records = tuple(r for r in self.profile.records if not r.excluded)
        profile = Profile("host", KernelVariant.ELL_INNER, 1, 1.0, records, self.profile.d_star)
        self.assertNotIn("Excluded Matrices", self.generator.render_markdown(profile))

    def test_number_filter(self):
        self.assertEqual(self.generator._number_filter(None), "-")
        self.assertEqual(self.generator._number_filter(0.123456), "0.1235")

    def test_html(self):
        html = self.generator.render_html(self.generator.render_markdown(self.profile))
        self.assertIn("<table>", html)
        self.assertIn("<h1>Machine Profile: bench-host</h1>", html)
        self.assertNotIn("machine_label:", html)


class TestWriteReport(unittest.TestCase):
    """write_report"""

    def test_markdown_and_html_written(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            out = Path(temp_dir) / "reports" / "profile.md"
            written = write_report(sample_profile(), out, html=True)
            self.assertEqual(written, [out, out.with_suffix('.html')])
            self.assertTrue(all(path.exists() for path in written))
            self.assertIn("spmvtune v", out.read_text(encoding='utf-8'))

    def test_markdown_only(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            out = Path(temp_dir) / "profile.md"
            self.assertEqual(write_report(sample_profile(), out), [out])


if __name__ == '__main__':
    unittest.main()

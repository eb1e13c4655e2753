#!/usr/bin/env python3
"""
Demo Script
Off-line profiling over a small generated sweep, then on-line decisions and a report
"""

import sys
import tempfile
from pathlib import Path

# Add paths for imports
sys.path.insert(0, str(Path(__file__).parent.parent))
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from generators.report_generator import write_report
from spmvtune.autotune import amortization_iterations, offline_profile, online_select
from spmvtune.errors import SpmvTuneError
from spmvtune.ingest import gen_banded, gen_cv_target, gen_skewed
from spmvtune.profile_store import write_plot_csv, write_profile

DEMO_TARGETS = (0.0, 0.1, 0.3, 0.5, 1.0, 2.0)
DEMO_N = 20_000


def build_matrix_set():
    """Sweep the D_mat axis with the CV-target generator"""
    matrices = []
    for seed, target in enumerate(DEMO_TARGETS, 1):
        matrices.append((f"cv-{target:.2f}", gen_cv_target(DEMO_N, 8, target, seed=seed)))
        print(f"   ✅ cv-{target:.2f}: nnz={matrices[-1][1].nnz}")
    return matrices


def print_profile(profile):
    print(f"\n   {'matrix':<10} {'D_mat':>8} {'SP':>8} {'TT':>8} {'R':>8} {'pays off after':>15}")
    for record in sorted(profile.included_records(), key=lambda r: r.stats.d_mat):
        iterations = amortization_iterations(record.timings)
        print(f"   {record.matrix_id:<10} {record.stats.d_mat:>8.3f} {record.metrics.sp:>8.3f} "
              f"{record.metrics.tt:>8.3f} {record.metrics.r:>8.3f} "
              f"{iterations if iterations is not None else 'never':>15}")
    print(f"\n   D* = {profile.d_star!r} (c = {profile.c})")


def main():
    """Run complete demo"""
    print("🎬 spmvtune - Auto-tuning Demo")
    print("=" * 60)

    try:
        print("\n1️⃣ Generating benchmark matrices...")
        matrices = build_matrix_set()

        print("\n2️⃣ Off-line phase: timing CRS, ELL and the transformation...")
        profile = offline_profile(matrices, lanes=1, repeats=5, machine_label="demo")
        print_profile(profile)

        print("\n3️⃣ On-line phase: choosing a format per matrix...")
        candidates = {
            "banded": gen_banded(DEMO_N, 4, wrap=True),
            "skewed": gen_skewed(DEMO_N, 4, 20, 5_000, seed=99),
        }
        for name, m in candidates.items():
            selection = online_select(m, profile)
            print(f"   {name:<8} d_mat={selection.d_mat:.4f} -> {selection.decision.value}")

        print("\n4️⃣ Saving profile and report...")
        out_dir = Path(tempfile.mkdtemp(prefix="spmvtune-demo-"))
        write_profile(profile, out_dir / "profile.json")
        write_plot_csv(profile, out_dir / "profile.csv")
        for path in write_report(profile, out_dir / "profile_report.md", html=True):
            print(f"   📄 {path}")
        print(f"   📄 {out_dir / 'profile.json'}")
        print(f"   📄 {out_dir / 'profile.csv'}")
    except SpmvTuneError as e:
        print(f"❌ Demo failed: {e}")
        return 1

    print("\n💡 Try These Commands:")
    print("   python cli/spmvtune.py gen cv-target 50000 8 0.5 --out cv.mtx")
    print("   python cli/spmvtune.py info cv.mtx")
    print("   python cli/spmvtune.py profile data/benchmark_set.yaml --out profile.json")
    print("   python cli/spmvtune.py select cv.mtx --profile profile.json")
    print("=" * 60)
    return 0


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)

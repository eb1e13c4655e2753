#!/usr/bin/env python3
"""
spmvtune CLI
Inspect, convert and multiply sparse matrices, benchmark kernels, build
machine profiles and make the on-line CRS/ELL decision
"""

import argparse
import csv
import logging
import re
import sys
import time
from pathlib import Path

# Add paths for imports
sys.path.insert(0, str(Path(__file__).parent.parent))
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import numpy as np

from spmvtune.autotune import (
    default_kernel_for,
    kernel_sweep,
    measure_record,
    offline_profile,
    online_select,
)
from spmvtune.config import load_config
from spmvtune.convert import (
    ccs_to_coo_col,
    crs_to_ccs,
    crs_to_coo_col,
    crs_to_coo_row,
    crs_to_ell,
    estimate_ell_bytes,
    ell_to_crs,
    max_row_degree,
)
from spmvtune.errors import SpmvTuneError, StatsError
from spmvtune.formats import crs_nbytes, ell_fill_stats, ell_nbytes
from spmvtune.ingest import (
    generate,
    load_benchmark_set,
    read_matrix_market,
    reference_row,
    write_coordinate,
    write_matrix_market,
)
from spmvtune.ingest.benchmark_set import GENERATORS
from spmvtune.profile_store import format_number, read_profile, write_plot_csv, write_profile
from spmvtune.spmv import KernelVariant, prepare_operand, relative_error, run_kernel, spmv_crs
from spmvtune.stats import row_stats

logger = logging.getLogger("spmvtune.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CHECK = 3

INFO_CSV_COLUMNS = ("matrix_id", "n", "nnz", "mu", "sigma", "d_mat", "max_row_degree", "ell_bytes_estimate")
BENCH_CSV_COLUMNS = ("matrix_id", "d_mat", "t_crs", "t_ell", "t_trans", "sp", "tt", "r",
                     "excluded", "exclusion_reason")
SWEEP_CSV_COLUMNS = ("matrix_id", "kernel", "lanes", "seconds", "sp")

KERNEL_CHOICES = [k.value for k in KernelVariant]
TUNED_KERNEL_CHOICES = [k.value for k in KernelVariant if k != KernelVariant.CRS]
MANIFEST_SUFFIXES = (".yaml", ".yml")


class CliArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    """Arguments that parse but do not fit together"""


class CheckFailure(Exception):
    """A requested --check did not pass"""


# ============================================================================
# Argument helpers
# ============================================================================

def vector_spec(text):
    """'ones' or 'seed:N'"""
    if text == "ones":
        return ("ones", None)
    match = re.fullmatch(r"seed:(\d+)", text)
    if not match:
        raise argparse.ArgumentTypeError(f"expected 'ones' or 'seed:N', got '{text}'")
    return ("seed", int(match.group(1)))


def int_list(text):
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"lane counts must be positive, got '{text}'")
    return values


def kernel_list(text):
    kernels = [part for part in text.split(",") if part]
    unknown = [k for k in kernels if k not in KERNEL_CHOICES]
    if unknown or not kernels:
        raise argparse.ArgumentTypeError(f"unknown kernel(s) {', '.join(unknown) or text}")
    return kernels


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def make_vector(spec, n):
    kind, seed = spec
    if kind == "ones":
        return np.ones(n)
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.uniform(-1.0, 1.0, size=n)


def matrix_id_for(path):
    return Path(path).stem


def _writer():
    return csv.writer(sys.stdout, lineterminator="\n")


# ============================================================================
# Commands
# ============================================================================

def cmd_info(args, config):
    m = read_matrix_market(args.matrix)
    try:
        stats = row_stats(m)
    except StatsError:
        stats = None
    degree = max_row_degree(m)
    estimate = estimate_ell_bytes(m, config.value_bytes, config.index_bytes)

    if args.csv:
        writer = _writer()
        writer.writerow(INFO_CSV_COLUMNS)
        writer.writerow((
            matrix_id_for(args.matrix), m.n, m.nnz,
            format_number(stats.mu if stats else None),
            format_number(stats.sigma if stats else None),
            format_number(stats.d_mat if stats else None),
            degree, estimate,
        ))
        return EXIT_OK

    print(f"📄 {args.matrix}")
    print(f"  n:                  {m.n}")
    print(f"  nnz:                {m.nnz}")
    if stats is None:
        print("  mu / sigma / D_mat: undefined (no stored entries)")
    else:
        print(f"  mean mu:            {stats.mu:.4f}")
        print(f"  deviation sigma:    {stats.sigma:.4f}")
        print(f"  D_mat:              {stats.d_mat:.4f}")
    print(f"  max row degree:     {degree}")
    print(f"  ELL bytes estimate: {estimate} ({estimate / max(crs_nbytes(m), 1):.2f}x CRS)")
    if estimate > config.max_ell_bytes:
        print(f"  ⚠️ ELL would exceed the {config.max_ell_bytes} byte cap")

    reference = reference_row(args.matrix)
    if reference:
        print(f"  reference ({reference['name']}): N={reference['n']} NNZ={reference['nnz']} "
              f"mu={reference['mu']} sigma={reference['sigma']} D_mat={reference['d_mat']}")
    return EXIT_OK


def cmd_convert(args, config):
    m = read_matrix_market(args.matrix)
    out = Path(args.out)
    max_bytes = args.max_bytes if args.max_bytes is not None else config.max_ell_bytes

    if args.to in ("coo-row", "coo-col"):
        coo = crs_to_coo_row(m) if args.to == "coo-row" else crs_to_coo_col(m)
        write_coordinate(out, coo.n, coo.row_idx, coo.col_idx, coo.values)
    elif args.to == "ccs":
        ccs = crs_to_ccs(m)
        coo = ccs_to_coo_col(ccs)
        write_coordinate(out, ccs.n, coo.row_idx, coo.col_idx, coo.values)
    else:
        start = time.perf_counter()
        ell = crs_to_ell(m, max_bytes)
        seconds = time.perf_counter() - start
        fill = ell_fill_stats(ell)
        write_matrix_market(ell_to_crs(ell), out)
        stats_line = (f"n={ell.n} nz={ell.nz} stored_nnz={fill.stored_nnz} padding={fill.padding} "
                      f"fill_ratio={fill.fill_ratio!r} ell_bytes={ell_nbytes(ell)} "
                      f"crs_bytes={crs_nbytes(m)} seconds={seconds!r}")
        sidecar = out.with_name(out.name + ".ell")
        sidecar.write_text(stats_line + "\n", encoding="utf-8")
        print(f"📊 ELL {stats_line}")

    print(f"✅ {args.to} written to {out}")
    return EXIT_OK


def cmd_spmv(args, config):
    m = read_matrix_market(args.matrix)
    lanes = args.lanes or config.lanes
    max_bytes = args.max_bytes if args.max_bytes is not None else config.max_ell_bytes
    kernel = KernelVariant(args.kernel)
    x = make_vector(args.x, m.n)

    operand = prepare_operand(m, kernel, max_bytes)
    start = time.perf_counter()
    y = run_kernel(kernel, operand, x, lanes)
    seconds = time.perf_counter() - start
    print(f"⚙️ {kernel.value} on {lanes} lane(s): {seconds:.6e} s, ||y||_inf = {float(np.max(np.abs(y), initial=0.0)):.6e}")

    if args.check:
        error = relative_error(y, spmv_crs(m, x))
        if error > config.check_tolerance:
            raise CheckFailure(f"max relative error {error:.3e} exceeds {config.check_tolerance:.1e}")
        print(f"✅ check passed: max relative error {error:.3e}")
    return EXIT_OK


def _bench_row(record):
    stats, timings, metrics = record.stats, record.timings, record.metrics
    return (
        record.matrix_id,
        format_number(stats.d_mat if stats else None),
        format_number(timings.t_crs),
        format_number(timings.t_ell),
        format_number(timings.t_trans),
        format_number(metrics.sp if metrics else None),
        format_number(metrics.tt if metrics else None),
        format_number(metrics.r if metrics else None),
        "true" if record.excluded else "false",
        record.exclusion_reason or "",
    )


def cmd_bench(args, config):
    lanes = args.lanes or config.lanes
    kernel = KernelVariant(args.kernel) if args.kernel else default_kernel_for(lanes)
    repeats = args.repeats or config.repeats
    max_bytes = args.max_bytes if args.max_bytes is not None else config.max_ell_bytes

    matrices = [(matrix_id_for(path), read_matrix_market(path)) for path in args.matrix]
    writer = _writer()
    writer.writerow(BENCH_CSV_COLUMNS)
    for matrix_id, m in matrices:
        record = measure_record(matrix_id, m, kernel, lanes, repeats, max_bytes)
        writer.writerow(_bench_row(record))
    return EXIT_OK


def collect_matrices(inputs):
    """(id, CrsMatrix) pairs from files, directories of *.mtx and YAML manifests"""
    matrices = []
    for item in map(Path, inputs):
        if item.is_dir():
            for path in sorted(item.glob("*.mtx")):
                matrices.append((matrix_id_for(path), read_matrix_market(path)))
        elif item.suffix.lower() in MANIFEST_SUFFIXES:
            matrices.extend(load_benchmark_set(item))
        else:
            matrices.append((matrix_id_for(item), read_matrix_market(item)))
    return matrices


def cmd_profile(args, config):
    lanes = args.lanes or config.lanes
    c = args.c if args.c is not None else config.c
    max_bytes = args.max_bytes if args.max_bytes is not None else config.max_ell_bytes

    matrices = collect_matrices(args.inputs)
    profile = offline_profile(
        matrices,
        kernel_variant=args.kernel,
        lanes=lanes,
        c=c,
        repeats=args.repeats or config.repeats,
        max_bytes=max_bytes,
        machine_label=args.machine_label,
    )

    out = Path(args.out)
    csv_path = Path(args.csv) if args.csv else out.with_suffix(".csv")
    write_profile(profile, out)
    write_plot_csv(profile, csv_path)

    excluded = len(profile.records) - len(profile.included_records())
    print(f"📊 {len(profile.records)} matrices profiled with {profile.kernel_variant.value} "
          f"on {profile.lanes} lane(s), {excluded} excluded")
    print(f"📄 Profile: {out}")
    print(f"📄 Plot data: {csv_path}")
    print(f"D* = {profile.d_star!r}")
    return EXIT_OK


def cmd_select(args, config):
    profile = read_profile(args.profile)
    m = read_matrix_market(args.matrix)
    selection = online_select(m, profile)
    print(f"{selection.decision.value} d_mat={selection.d_mat!r} d_star={selection.d_star!r}")
    return EXIT_OK


def cmd_gen(args, config):
    _, int_names, real_names, _, seeded = GENERATORS[args.kind]
    names = int_names + real_names
    if len(args.params) != len(names):
        raise UsageError(f"gen {args.kind} takes {len(names)} parameters: {' '.join(names)}")
    try:
        params = {name: float(value) for name, value in zip(names, args.params)}
    except ValueError:
        raise UsageError(f"gen {args.kind} parameters must be numbers, got {' '.join(args.params)}")
    if args.wrap:
        if args.kind != "banded":
            raise UsageError("--wrap only applies to banded")
        params["wrap"] = True

    m = generate(args.kind, params, seed=args.seed if seeded else None)
    write_matrix_market(m, args.out)
    print(f"✅ {args.kind} matrix written to {args.out}: n={m.n}, nnz={m.nnz}")
    try:
        stats = row_stats(m)
        print(f"  mu={stats.mu!r} sigma={stats.sigma!r} d_mat={stats.d_mat!r}")
    except StatsError as e:
        print(f"  {e}")
    return EXIT_OK


def cmd_sweep(args, config):
    m = read_matrix_market(args.matrix)
    max_bytes = args.max_bytes if args.max_bytes is not None else config.max_ell_bytes
    rows = kernel_sweep(m, args.kernels, args.lanes_list, args.repeats or config.repeats, max_bytes)

    matrix_id = matrix_id_for(args.matrix)
    writer = _writer()
    writer.writerow(SWEEP_CSV_COLUMNS)
    for row in rows:
        writer.writerow((matrix_id, row.kernel.value, row.lanes, format_number(row.seconds), format_number(row.sp)))
        if row.note:
            logger.warning(f"{row.kernel.value} at {row.lanes} lane(s): {row.note}")
    return EXIT_OK


def cmd_report(args, config):
    from generators.report_generator import write_report

    profile = read_profile(args.profile)
    for path in write_report(profile, args.out, html=args.html):
        print(f"📄 Report: {path}")
    return EXIT_OK


# ============================================================================
# Parser
# ============================================================================

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration (default: data/tuning.yaml)")
    common.add_argument("--verbose", "-v", action="store_true", help="Log progress to stderr")

    parser = CliArgumentParser(
        prog="spmvtune",
        description="Sparse matrix formats, SpMV kernels and run-time CRS/ELL auto-tuning",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python cli/spmvtune.py gen banded 10000 3 --out band.mtx
  python cli/spmvtune.py info band.mtx --csv
  python cli/spmvtune.py spmv band.mtx --kernel ell-outer --lanes 4 --check
  python cli/spmvtune.py profile data/benchmark_set.yaml --out profile.json
  python cli/spmvtune.py select band.mtx --profile profile.json

Exit status: 0 success, 1 usage error, 2 data/validation error, 3 check failure
        """
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("info", parents=[common], help="Row statistics and ELL footprint of a matrix")
    p.add_argument("matrix")
    p.add_argument("--csv", action="store_true", help="Machine-readable CSV output")
    p.set_defaults(handler=cmd_info)

    p = sub.add_parser("convert", parents=[common], help="Convert storage format and write the result")
    p.add_argument("matrix")
    p.add_argument("--to", required=True, choices=["coo-row", "coo-col", "ccs", "ell"])
    p.add_argument("--out", required=True)
    p.add_argument("--max-bytes", type=int, help="ELL footprint cap in bytes")
    p.set_defaults(handler=cmd_convert)

    p = sub.add_parser("spmv", parents=[common], help="Run one SpMV")
    p.add_argument("matrix")
    p.add_argument("--kernel", choices=KERNEL_CHOICES, default="crs")
    p.add_argument("--lanes", type=positive_int)
    p.add_argument("--x", type=vector_spec, default=("ones", None), help="'ones' or 'seed:N'")
    p.add_argument("--check", action="store_true", help="Compare against the CRS baseline")
    p.add_argument("--max-bytes", type=int)
    p.set_defaults(handler=cmd_spmv)

    p = sub.add_parser("bench", parents=[common], help="Time t_crs, t_ell and t_trans as CSV")
    p.add_argument("matrix", nargs="+")
    p.add_argument("--kernel", choices=TUNED_KERNEL_CHOICES)
    p.add_argument("--lanes", type=positive_int)
    p.add_argument("--repeats", type=positive_int)
    p.add_argument("--max-bytes", type=int)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("profile", parents=[common], help="Off-line phase: build a machine profile")
    p.add_argument("inputs", nargs="+", help="Matrix Market files, directories of *.mtx, or YAML benchmark sets")
    p.add_argument("--kernel", choices=TUNED_KERNEL_CHOICES)
    p.add_argument("--lanes", type=positive_int)
    p.add_argument("--c", type=float)
    p.add_argument("--repeats", type=positive_int)
    p.add_argument("--max-bytes", type=int)
    p.add_argument("--machine-label")
    p.add_argument("--out", required=True, help="Profile JSON path")
    p.add_argument("--csv", help="Plot CSV path (default: profile path with .csv)")
    p.set_defaults(handler=cmd_profile)

    p = sub.add_parser("select", parents=[common], help="On-line phase: UseEll or UseCrs")
    p.add_argument("matrix")
    p.add_argument("--profile", required=True)
    p.set_defaults(handler=cmd_select)

    p = sub.add_parser("gen", parents=[common], help="Write a synthetic matrix")
    p.add_argument("kind", choices=sorted(GENERATORS))
    p.add_argument("params", nargs="*", help="banded: n half_width; skewed: n base_deg heavy_rows heavy_deg; "
                                             "cv-target: n mean_deg target_dmat")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wrap", action="store_true", help="banded: wrap the band around the edges")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("sweep", parents=[common], help="Time kernels across lane counts as CSV")
    p.add_argument("matrix")
    p.add_argument("--kernels", type=kernel_list, default=list(TUNED_KERNEL_CHOICES))
    p.add_argument("--lanes-list", type=int_list, default=[1, 2, 4])
    p.add_argument("--repeats", type=positive_int)
    p.add_argument("--max-bytes", type=int)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("report", parents=[common], help="Markdown report of a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--html", action="store_true", help="Also write HTML")
    p.set_defaults(handler=cmd_report)

    return parser


def main(argv=None):
    """Main CLI entry point"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        config = load_config(args.config)
        return args.handler(args, config)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except CheckFailure as e:
        print(f"❌ check failed: {e}", file=sys.stderr)
        return EXIT_CHECK
    except (SpmvTuneError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

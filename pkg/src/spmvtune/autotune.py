"""
Run-time Auto-tuning
Cost model, off-line profiling (D_mat vs R records and threshold D*) and
the on-line CRS/ELL decision
"""

import logging
import math
import platform
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import EllMemoryError, ProfilingError, StatsError, TimingError
from .spmv import KernelVariant, prepare_operand, run_kernel
from .stats import RowStats, row_stats

logger = logging.getLogger(__name__)

METRIC_RTOL = 1e-12


@dataclass(frozen=True)
class Timings:
    """
    Seconds for one CRS SpMV, one SpMV in the tuned format and one
    serial transformation. t_ell and t_trans are None on excluded records.
    """

    t_crs: float
    t_ell: Optional[float] = None
    t_trans: Optional[float] = None

    @property
    def complete(self):
        return self.t_ell is not None and self.t_trans is not None


@dataclass(frozen=True)
class CostMetrics:
    sp: float
    tt: float
    r: float


@dataclass(frozen=True)
class BenchRecord:
    """One off-line measurement"""

    matrix_id: str
    n: int
    nnz: int
    stats: Optional[RowStats]
    timings: Timings
    metrics: Optional[CostMetrics]
    kernel_variant: KernelVariant
    lanes: int
    excluded: bool = False
    exclusion_reason: Optional[str] = None


@dataclass(frozen=True)
class Profile:
    """Machine profile: every record plus the threshold D*"""

    machine_label: str
    kernel_variant: KernelVariant
    lanes: int
    c: float
    records: tuple = field(default_factory=tuple)
    d_star: float = 0.0

    def included_records(self):
        return [record for record in self.records if not record.excluded]


class Decision(str, Enum):
    USE_ELL = "UseEll"
    USE_CRS = "UseCrs"


@dataclass(frozen=True)
class Selection:
    decision: Decision
    d_mat: float
    d_star: float


@dataclass(frozen=True)
class SweepRow:
    """Timing of one kernel at one lane count against the CRS baseline"""

    kernel: KernelVariant
    lanes: int
    seconds: Optional[float]
    sp: Optional[float]
    note: Optional[str] = None


# ============================================================================
# Cost model
# ============================================================================

def _require_positive(**timings):
    for name, value in timings.items():
        if value is None or not value > 0:
            raise TimingError(f"{name} must be strictly positive, got {value}")


def compute_metrics(t):
    """
    Speedup, transformation overhead and their ratio

    sp = t_crs / t_ell, tt = t_trans / t_crs (overhead in units of one
    CRS SpMV), r = sp / tt.
    """
    _require_positive(t_crs=t.t_crs, t_ell=t.t_ell, t_trans=t.t_trans)
    sp = t.t_crs / t.t_ell
    tt = t.t_trans / t.t_crs
    return CostMetrics(sp=sp, tt=tt, r=sp / tt)


def amortization_iterations(t):
    """
    Smallest k with t_trans + k * t_ell <= k * t_crs, None when ELL is not faster
    """
    _require_positive(t_crs=t.t_crs, t_ell=t.t_ell, t_trans=t.t_trans)
    gain = t.t_crs - t.t_ell
    if gain <= 0:
        return None

    def pays_off(k):
        return t.t_trans + k * t.t_ell <= k * t.t_crs

    k = max(1, math.ceil(t.t_trans / gain))
    # the closed form can be off by one under rounding
    while k > 1 and pays_off(k - 1):
        k -= 1
    while not pays_off(k):
        k += 1
    return k


def default_kernel_for(lanes):
    return KernelVariant.ELL_OUTER if lanes > 1 else KernelVariant.ELL_INNER


# ============================================================================
# Measurement
# ============================================================================

_CLOCK_RESOLUTION = time.get_clock_info("perf_counter").resolution


def measure_spmv(kernel, matrix, x, repeats=9, lanes=1):
    """
    Median wall-clock seconds of one kernel call

    One untimed warm-up call precedes the timed repeats.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be at least 1, got {repeats}")
    run_kernel(kernel, matrix, x, lanes)
    durations = []
    for _ in range(repeats):
        start = time.perf_counter()
        run_kernel(kernel, matrix, x, lanes)
        durations.append(time.perf_counter() - start)
    return max(float(np.median(durations)), _CLOCK_RESOLUTION)


def measure_transformation(m, max_bytes=None, kernel=KernelVariant.ELL_OUTER):
    """
    Convert once, cold, and time it

    Returns:
        tuple: (converted matrix, seconds)

    Raises:
        EllMemoryError: ELL footprint over max_bytes; nothing is timed
    """
    start = time.perf_counter()
    converted = prepare_operand(m, kernel, max_bytes)
    elapsed = time.perf_counter() - start
    return converted, max(elapsed, _CLOCK_RESOLUTION)


# ============================================================================
# Off-line phase
# ============================================================================

def find_d_star(records, c=1.0):
    """
    Largest D_mat such that every record at or below it has r >= c

    Records sharing a D_mat value qualify only together. Returns 0.0 when
    the smallest D_mat already fails or there are no records.
    """
    d_star = 0.0
    ordered = sorted(records, key=lambda pair: pair[0])
    index = 0
    while index < len(ordered):
        d_value = ordered[index][0]
        group_passes = True
        while index < len(ordered) and ordered[index][0] == d_value:
            group_passes = group_passes and ordered[index][1] >= c
            index += 1
        if not group_passes:
            break
        d_star = d_value
    return d_star


def _machine_label():
    return f"{platform.node()} {platform.machine()} {platform.processor()}".strip()


def measure_record(matrix_id, m, kernel, lanes=1, repeats=9, max_bytes=None):
    """
    One BenchRecord: row statistics, t_crs, t_trans and t_ell of m

    Matrices without entries or refused by the ELL memory cap come back as
    excluded records carrying only t_crs and the reason.
    """
    kernel = KernelVariant(kernel)
    try:
        stats = row_stats(m)
    except StatsError as e:
        stats = None
        logger.warning(f"{matrix_id}: {e}")

    x = np.ones(m.n)
    t_crs = measure_spmv(KernelVariant.CRS, m, x, repeats)

    def excluded(reason):
        return BenchRecord(matrix_id, m.n, m.nnz, stats, Timings(t_crs), None, kernel, lanes,
                           excluded=True, exclusion_reason=reason)

    if stats is None:
        return excluded("D_mat undefined: matrix has no stored entries")
    try:
        operand, t_trans = measure_transformation(m, max_bytes, kernel)
    except EllMemoryError as e:
        logger.info(f"{matrix_id}: excluded, {e}")
        return excluded(str(e))

    t_ell = measure_spmv(kernel, operand, x, repeats, lanes)
    timings = Timings(t_crs, t_ell, t_trans)
    metrics = compute_metrics(timings)
    logger.info(f"{matrix_id}: d_mat={stats.d_mat:.4f} sp={metrics.sp:.3f} tt={metrics.tt:.3f} r={metrics.r:.3f}")
    return BenchRecord(matrix_id, m.n, m.nnz, stats, timings, metrics, kernel, lanes)


def offline_profile(matrix_set, kernel_variant=None, lanes=1, c=1.0, repeats=9,
                    max_bytes=None, machine_label=None):
    """
    Build a machine profile from a benchmark set

    Args:
        matrix_set: sequence of (matrix_id, CrsMatrix)
        kernel_variant: kernel timed for t_ell; default_kernel_for(lanes) when None
        lanes: lane count for the tuned kernel (the CRS baseline is sequential)
        c: threshold constant on R
        repeats: timed repeats per SpMV measurement
        max_bytes: ELL footprint cap; refused matrices are kept as excluded records
        machine_label: free text, host description when None

    Returns:
        Profile
    """
    matrix_set = list(matrix_set)
    if not matrix_set:
        raise ProfilingError("Benchmark matrix set is empty")
    if not c > 0:
        raise ProfilingError(f"c must be positive, got {c}")
    kernel = KernelVariant(kernel_variant) if kernel_variant is not None else default_kernel_for(lanes)
    if kernel == KernelVariant.CRS:
        raise ProfilingError("The tuned kernel must be a COO or ELL kernel, not the CRS baseline")

    logger.info(f"Profiling {len(matrix_set)} matrices with {kernel.value} on {lanes} lane(s)")
    records = tuple(
        measure_record(matrix_id, m, kernel, lanes, repeats, max_bytes)
        for matrix_id, m in matrix_set
    )
    d_star = find_d_star([(r.stats.d_mat, r.metrics.r) for r in records if not r.excluded], c)
    logger.info(f"D* = {d_star} (c = {c})")
    return Profile(machine_label or _machine_label(), kernel, lanes, float(c), records, d_star)


def check_profile(p):
    """
    Consistency of a profile with its own records

    Returns:
        tuple: (is_valid, error_messages)
    """
    errors = []
    for index, record in enumerate(p.records, 1):
        label = f"Record {index} ({record.matrix_id})"
        if record.kernel_variant != p.kernel_variant or record.lanes != p.lanes:
            errors.append(f"{label}: kernel/lanes differ from the profile")
        if record.excluded:
            if record.metrics is not None:
                errors.append(f"{label}: excluded record carries metrics")
            continue
        if record.stats is None or record.metrics is None or not record.timings.complete:
            errors.append(f"{label}: included record lacks statistics, timings or metrics")
            continue
        try:
            expected = compute_metrics(record.timings)
        except TimingError as e:
            errors.append(f"{label}: {e}")
            continue
        for name in ("sp", "tt", "r"):
            stored, recomputed = getattr(record.metrics, name), getattr(expected, name)
            if not math.isclose(stored, recomputed, rel_tol=METRIC_RTOL):
                errors.append(f"{label}: {name} = {stored!r} disagrees with timings ({recomputed!r})")

    if not errors:
        expected_d_star = find_d_star(
            [(r.stats.d_mat, r.metrics.r) for r in p.included_records()], p.c
        )
        if expected_d_star != p.d_star:
            errors.append(f"d_star = {p.d_star!r}, records and c give {expected_d_star!r}")
    return len(errors) == 0, errors


# ============================================================================
# On-line phase
# ============================================================================

def online_select(m, p):
    """
    UseEll iff D_mat(m) < D* (strict)

    Raises:
        StatsError: m has no stored entries
    """
    d_mat = row_stats(m).d_mat
    decision = Decision.USE_ELL if d_mat < p.d_star else Decision.USE_CRS
    logger.debug(f"online_select: d_mat={d_mat!r} d_star={p.d_star!r} -> {decision.value}")
    return Selection(decision, d_mat, p.d_star)


def kernel_sweep(m, kernels, lane_counts, repeats=9, max_bytes=None):
    """
    Time every kernel at every lane count against the sequential CRS baseline

    ELL kernels refused by the memory cap yield rows without timings.
    """
    x = np.ones(m.n)
    t_crs = measure_spmv(KernelVariant.CRS, m, x, repeats)
    rows = []
    for kernel in map(KernelVariant, kernels):
        try:
            operand = prepare_operand(m, kernel, max_bytes)
        except EllMemoryError as e:
            rows.extend(SweepRow(kernel, lanes, None, None, str(e)) for lanes in lane_counts)
            continue
        for lanes in lane_counts:
            lanes_used = 1 if kernel == KernelVariant.CRS else lanes
            seconds = measure_spmv(kernel, operand, x, repeats, lanes_used)
            rows.append(SweepRow(kernel, lanes, seconds, t_crs / seconds))
    return rows

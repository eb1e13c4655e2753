"""
Profile Persistence
Profile <-> JSON document, schema-checked on read, plus the D_mat / R plot CSV
"""

import csv
import json
import logging
from pathlib import Path

from .autotune import BenchRecord, CostMetrics, Profile, Timings, check_profile
from .config import load_schema, schema_errors
from .errors import ProfileSchemaError
from .spmv import KernelVariant
from .stats import RowStats

logger = logging.getLogger(__name__)

PROFILE_VERSION = 1
PLOT_CSV_COLUMNS = ("matrix_id", "d_mat", "r", "excluded")


def format_number(value):
    """Shortest decimal text that reads back to the identical double; '' for None"""
    return "" if value is None else repr(float(value))


def record_to_dict(record):
    stats, timings, metrics = record.stats, record.timings, record.metrics
    return {
        "matrix_id": record.matrix_id,
        "n": record.n,
        "nnz": record.nnz,
        "mu": stats.mu if stats else None,
        "sigma": stats.sigma if stats else None,
        "d_mat": stats.d_mat if stats else None,
        "t_crs": timings.t_crs,
        "t_ell": timings.t_ell,
        "t_trans": timings.t_trans,
        "sp": metrics.sp if metrics else None,
        "tt": metrics.tt if metrics else None,
        "r": metrics.r if metrics else None,
        "excluded": record.excluded,
        "exclusion_reason": record.exclusion_reason,
    }


def profile_to_dict(p):
    return {
        "version": PROFILE_VERSION,
        "machine_label": p.machine_label,
        "kernel_variant": p.kernel_variant.value,
        "lanes": p.lanes,
        "c": p.c,
        "d_star": p.d_star,
        "records": [record_to_dict(record) for record in p.records],
    }


def _record_from_dict(data, kernel, lanes):
    stats = None
    if data["d_mat"] is not None:
        stats = RowStats(mu=data["mu"], sigma=data["sigma"], d_mat=data["d_mat"])
    metrics = None
    if data["r"] is not None:
        metrics = CostMetrics(sp=data["sp"], tt=data["tt"], r=data["r"])
    return BenchRecord(
        matrix_id=data["matrix_id"],
        n=int(data["n"]),
        nnz=int(data["nnz"]),
        stats=stats,
        timings=Timings(data["t_crs"], data["t_ell"], data["t_trans"]),
        metrics=metrics,
        kernel_variant=kernel,
        lanes=lanes,
        excluded=data["excluded"],
        exclusion_reason=data["exclusion_reason"],
    )


def profile_from_dict(data):
    """
    Build a Profile from a parsed document

    Raises:
        ProfileSchemaError: schema violations or an inconsistent d_star / metric
    """
    errors = schema_errors(data, load_schema("profile_schema.json"), "Profile")
    if errors:
        raise ProfileSchemaError(errors)

    kernel = KernelVariant(data["kernel_variant"])
    lanes = int(data["lanes"])
    profile = Profile(
        machine_label=data["machine_label"],
        kernel_variant=kernel,
        lanes=lanes,
        c=float(data["c"]),
        records=tuple(_record_from_dict(record, kernel, lanes) for record in data["records"]),
        d_star=float(data["d_star"]),
    )
    is_valid, messages = check_profile(profile)
    if not is_valid:
        raise ProfileSchemaError(messages)
    return profile


def write_profile(p, path):
    """Write the profile JSON; floats use their exact round-trip representation"""
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        json.dump(profile_to_dict(p), f, indent=2, allow_nan=False)
        f.write("\n")
    logger.info(f"Profile written to {output_path}")


def read_profile(path):
    """
    Read and validate a profile JSON file

    Raises:
        ProfileSchemaError: unreadable JSON, schema violations or inconsistencies
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ProfileSchemaError([f"Profile file not found: {path}"])
    except json.JSONDecodeError as e:
        raise ProfileSchemaError([f"JSON parsing error in {path}: {e}"])
    except UnicodeDecodeError as e:
        raise ProfileSchemaError([f"{path} is not UTF-8 text (bad byte at offset {e.start})"])
    return profile_from_dict(data)


def plot_rows(p):
    """(matrix_id, d_mat, r, excluded) rows, the D_mat / R graph data"""
    for record in p.records:
        yield (
            record.matrix_id,
            format_number(record.stats.d_mat if record.stats else None),
            format_number(record.metrics.r if record.metrics else None),
            "true" if record.excluded else "false",
        )


def write_plot_csv(p, path):
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(PLOT_CSV_COLUMNS)
        writer.writerows(plot_rows(p))
    logger.info(f"Plot CSV written to {output_path}")

"""
Benchmark Set Manifests
YAML lists of matrices for off-line profiling, plus the catalogued
reference statistics of well-known collection matrices
"""

import logging
import math
from pathlib import Path

import yaml

from ..config import PROJECT_ROOT, load_schema, schema_errors
from ..errors import IngestError
from .generators import gen_banded, gen_cv_target, gen_skewed
from .matrix_market import read_matrix_market

logger = logging.getLogger(__name__)

REFERENCE_MATRICES_PATH = PROJECT_ROOT / "data" / "reference_matrices.yaml"

# generator name -> (callable, integer parameters, real parameters, flags, takes a seed)
GENERATORS = {
    "banded": (gen_banded, ("n", "half_width"), (), ("wrap",), False),
    "skewed": (gen_skewed, ("n", "base_deg", "heavy_rows", "heavy_deg"), (), (), True),
    "cv-target": (gen_cv_target, ("n",), ("mean_deg", "target_dmat"), (), True),
}


def _load_yaml(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f)
    except FileNotFoundError:
        raise IngestError("file not found", path)
    except yaml.YAMLError as e:
        raise IngestError(f"YAML parsing error: {e}", path)


def generator_kwargs(name, params, defaults=None, seed=None):
    """
    Keyword arguments for one generator from manifest params and defaults

    Defaults only fill parameters the generator takes; explicit params win.

    Raises:
        IngestError: unknown generator, unknown or missing parameter, non-finite value
    """
    if name not in GENERATORS:
        raise IngestError(f"unknown generator '{name}'")
    _, int_names, real_names, flag_names, seeded = GENERATORS[name]
    accepted = int_names + real_names + flag_names

    unknown = sorted(set(params) - set(accepted))
    if unknown:
        raise IngestError(f"generator '{name}' does not take {', '.join(unknown)}")

    merged = {key: value for key, value in (defaults or {}).items() if key in accepted}
    merged.update(params)
    missing = [key for key in int_names + real_names if key not in merged]
    if missing:
        raise IngestError(f"generator '{name}' needs {', '.join(missing)}")

    numbers = {}
    for key in int_names + real_names:
        try:
            numbers[key] = float(merged[key])
        except (TypeError, ValueError):
            raise IngestError(f"generator '{name}' parameter {key} must be a number, got {merged[key]!r}")
        if not math.isfinite(numbers[key]):
            raise IngestError(f"generator '{name}' parameter {key} must be finite, got {merged[key]}")

    kwargs = {}
    for key in int_names:
        if not numbers[key].is_integer():
            raise IngestError(f"generator '{name}' parameter {key} must be an integer, got {merged[key]}")
        kwargs[key] = int(numbers[key])
    for key in real_names:
        kwargs[key] = numbers[key]
    for key in flag_names:
        if key in merged:
            kwargs[key] = bool(merged[key])
    if seeded:
        kwargs["seed"] = int(seed or 0)
    return kwargs


def generate(name, params, defaults=None, seed=None):
    """Run a named generator; the manifest-level entry point shared with the CLI"""
    kwargs = generator_kwargs(name, params, defaults, seed)
    return GENERATORS[name][0](**kwargs)


def load_benchmark_set(path):
    """
    Load every matrix a benchmark manifest names

    Entries are {id, path} (Matrix Market, relative to the manifest) or
    {id, generator, params, seed}; a top-level 'defaults' mapping supplies
    shared generator parameters.

    Returns:
        list: (matrix_id, CrsMatrix) in manifest order

    Raises:
        IngestError: schema violations, duplicate ids, unreadable files
        GeneratorError: infeasible generator parameters
    """
    path = Path(path)
    manifest = _load_yaml(path)
    errors = schema_errors(manifest, load_schema("benchmark_set_schema.json"), "Benchmark set")
    if errors:
        raise IngestError("; ".join(errors), path)

    defaults = manifest.get("defaults", {})
    matrices = []
    seen_ids = set()
    for entry in manifest["matrices"]:
        matrix_id = entry["id"]
        if matrix_id in seen_ids:
            raise IngestError(f"duplicate matrix id '{matrix_id}'", path)
        seen_ids.add(matrix_id)

        if "path" in entry:
            matrix = read_matrix_market(path.parent / entry["path"])
        else:
            matrix = generate(entry["generator"], entry.get("params", {}), defaults, entry.get("seed"))
        logger.info(f"Benchmark matrix {matrix_id}: n={matrix.n}, nnz={matrix.nnz}")
        matrices.append((matrix_id, matrix))
    return matrices


def load_reference_matrices(path=REFERENCE_MATRICES_PATH):
    """Catalogued reference rows keyed by matrix name"""
    data = _load_yaml(path) or {}
    return {row["name"]: row for row in data.get("matrices", [])}


def reference_row(matrix_path, catalogue=None):
    """Reference statistics for a file whose stem names a catalogued matrix, else None"""
    catalogue = load_reference_matrices() if catalogue is None else catalogue
    return catalogue.get(Path(matrix_path).stem)

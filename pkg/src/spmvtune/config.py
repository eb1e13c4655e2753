"""
Tuning Configuration
Loads data/tuning.yaml and checks it against schemas/tuning_config_schema.json
"""

import copy
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import yaml
from jsonschema import Draft7Validator

from .errors import ConfigError

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SCHEMA_DIR = PROJECT_ROOT / "schemas"
DEFAULT_CONFIG_PATH = PROJECT_ROOT / "data" / "tuning.yaml"

DEFAULTS = {
    "oracle": {"max_dense_n": 4096},
    "convert": {"value_bytes": 8, "index_bytes": 4},
    "cli": {"max_ell_bytes": 2 * 1024 ** 3, "lanes": 1, "repeats": 9},
    "autotune": {"c": 1.0, "check_tolerance": 1e-10},
}


@dataclass(frozen=True)
class TuningConfig:
    """Resolved configuration values"""

    max_dense_n: int
    value_bytes: int
    index_bytes: int
    max_ell_bytes: int
    lanes: int
    repeats: int
    c: float
    check_tolerance: float

    @classmethod
    def from_dict(cls, data):
        return cls(
            max_dense_n=data["oracle"]["max_dense_n"],
            value_bytes=data["convert"]["value_bytes"],
            index_bytes=data["convert"]["index_bytes"],
            max_ell_bytes=data["cli"]["max_ell_bytes"],
            lanes=data["cli"]["lanes"],
            repeats=data["cli"]["repeats"],
            c=float(data["autotune"]["c"]),
            check_tolerance=float(data["autotune"]["check_tolerance"]),
        )


def load_schema(schema_filename, schema_dir=SCHEMA_DIR):
    """Load JSON schema from file"""
    schema_path = Path(schema_dir) / schema_filename
    try:
        with open(schema_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        raise FileNotFoundError(f"Schema file not found: {schema_path}")
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid JSON in schema file {schema_path}: {e}")


def schema_errors(data, schema, data_type):
    """
    Collect every schema violation as a readable message

    Args:
        data: Parsed document
        schema: JSON schema to validate against
        data_type: Label used as the message prefix

    Returns:
        list: error messages, empty when the document is valid
    """
    validator = Draft7Validator(schema)
    errors = []
    for error in sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.path))):
        error_path = " -> ".join(str(p) for p in error.path) if error.path else "root"
        errors.append(f"{data_type} validation error at '{error_path}': {error.message}")
    return errors


def _merge(base, override):
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def default_config():
    """Built-in defaults, no file access"""
    return TuningConfig.from_dict(DEFAULTS)


def load_config(path=None):
    """
    Load the YAML configuration and merge it over the built-in defaults

    Args:
        path: YAML file; data/tuning.yaml when omitted (a missing default file is not an error)

    Returns:
        TuningConfig
    """
    config_path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not config_path.exists():
        if path is not None:
            raise ConfigError([f"Configuration file not found: {config_path}"])
        logger.debug(f"No configuration at {config_path}, using defaults")
        return default_config()

    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError([f"YAML parsing error: {e}"])

    errors = schema_errors(data, load_schema("tuning_config_schema.json"), "Config")
    if errors:
        raise ConfigError(errors)

    logger.debug(f"Loaded configuration from {config_path}")
    return TuningConfig.from_dict(_merge(DEFAULTS, data))

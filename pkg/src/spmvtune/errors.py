"""
Exception hierarchy
Every refusal raised by the library derives from SpmvTuneError
"""


class SpmvTuneError(Exception):
    """Base class for all library refusals"""


class MatrixValidationError(SpmvTuneError, ValueError):
    """A matrix broke one or more storage invariants"""

    def __init__(self, violations):
        self.violations = list(violations)
        preview = "; ".join(self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"Invalid matrix: {preview}{more}")


class DimensionError(SpmvTuneError, ValueError):
    """Vector length does not match the matrix dimension"""


class OrderingError(SpmvTuneError, ValueError):
    """A COO kernel received triplets with the wrong ordering tag"""


class ConversionError(SpmvTuneError, ValueError):
    """A storage transformation was refused"""


class EllMemoryError(ConversionError):
    """The ELL footprint would exceed the configured byte cap"""

    def __init__(self, estimate_bytes, max_bytes):
        self.estimate_bytes = estimate_bytes
        self.max_bytes = max_bytes
        super().__init__(
            f"ELL footprint estimate {estimate_bytes} bytes exceeds the cap of {max_bytes} bytes"
        )


class OracleCapError(SpmvTuneError, ValueError):
    """Dense oracle requested for a matrix above the size cap"""


class IngestError(SpmvTuneError, ValueError):
    """A Matrix Market file was refused"""

    def __init__(self, message, path=None, line_number=None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        super().__init__(f"{location}{message}")


class GeneratorError(SpmvTuneError, ValueError):
    """Generator parameters are out of range or infeasible"""


class StatsError(SpmvTuneError, ValueError):
    """Row statistics are undefined for the input"""


class TimingError(SpmvTuneError, ValueError):
    """A timing was not strictly positive"""


class ProfileSchemaError(SpmvTuneError, ValueError):
    """A profile document failed its schema or consistency checks"""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("Invalid profile: " + "; ".join(self.errors[:5]))


class ConfigError(SpmvTuneError, ValueError):
    """The YAML configuration failed its schema"""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("Invalid configuration: " + "; ".join(self.errors))


class FormatMismatchError(SpmvTuneError, TypeError):
    """A kernel received a matrix in a format it does not run on"""


class ProfilingError(SpmvTuneError, ValueError):
    """The off-line profiling inputs were refused"""

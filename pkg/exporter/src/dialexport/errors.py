"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
ModelError -> 4.
"""


class DialexportError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DialexportError):
    """Invalid job settings: bad modes, parameter values, flag combinations."""


class DataError(DialexportError):
    """Invalid or inconsistent input data, or an output that would violate
    the emitted file contracts."""


class ModelError(DialexportError):
    """Model checkpoint cannot be loaded or fails during fine-tuning or
    inference."""

"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError (and its TrainingDiverged subtype) -> 4.
"""


class DialretError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DialretError):
    """Invalid configuration: bad parameter values, malformed config files."""


class DataError(DialretError):
    """Invalid or inconsistent input data: corpora, runs, qrels, embeddings."""


class NumericError(DialretError):
    """Numeric failure during computation."""


class TrainingDiverged(NumericError):
    """Loss became non-finite during training."""

    def __init__(self, step: int, value: float):
        self.step = step
        self.value = value
        super().__init__(f"non-finite loss {value!r} at step {step}")

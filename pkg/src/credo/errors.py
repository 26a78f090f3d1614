"""Exception and warning types shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, DataError -> 3,
NumericError -> 4.
"""


class CredoError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CredoError):
    """Invalid configuration (bad value, unknown key, unknown model name)."""


class DataError(CredoError):
    """Problem with input data: parse failures, schema mismatches, bad shapes."""


class NumericError(CredoError):
    """Non-finite values or a numerically infeasible solve."""


class PipelineError(CredoError):
    """A pipeline stage failed; wraps the stage name and the original cause."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class CredoWarning(UserWarning):
    """Base warning; every subclass carries a stable ``code`` for reports."""

    code = "GENERIC"


class LdaClampWarning(CredoWarning):
    """Requested more discriminant components than the rank cap allows."""

    code = "LDA_COMPONENTS_CLAMPED"


class SmoteKClampWarning(CredoWarning):
    """k_neighbors exceeded class size and was clamped to class_size - 1."""

    code = "SMOTE_K_CLAMPED"


class MetricConventionWarning(CredoWarning):
    """A 0/0 metric was resolved by the documented convention (rate = 1)."""

    code = "METRIC_ZERO_OVER_ZERO"

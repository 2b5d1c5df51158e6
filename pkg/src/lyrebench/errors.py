"""Error types shared across the toolkit.

ValidationError covers malformed inputs and violated preconditions; the CLI
maps it to exit code 1.  I/O problems surface as plain OSError (exit code 2).
"""


class ValidationError(ValueError):
    """Input fails a structural or value-level contract."""


class UndefinedMetricError(ValidationError):
    """A metric is mathematically undefined for the given input."""

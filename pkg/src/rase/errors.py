"""Exception hierarchy shared by the library and the CLI."""


class RaseError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RaseError, ValueError):
    """A configuration value is missing, malformed, or out of range."""


class DataError(RaseError, ValueError):
    """Input data violates a contract (bad row, incomplete batch, out of range)."""


class DegenerateInputError(RaseError, ValueError):
    """The input is well-formed but too small for the requested operation."""


class InvariantViolation(RaseError, RuntimeError):
    """An internal consistency check failed."""

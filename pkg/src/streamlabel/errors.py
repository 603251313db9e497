class ContractError(ValueError):
    """A precondition of a pure operation was violated (bad shapes, empty inputs)."""


class ConfigError(ValueError):
    """Configuration cannot be satisfied by the given data or parameters."""


class DataError(ValueError):
    """Input files are malformed."""


class UndefinedMetricError(ZeroDivisionError):
    """A metric's denominator is zero."""

"""Exception hierarchy shared by every module."""


class SSAEError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(SSAEError, ValueError):
    """A function was called with arguments violating its preconditions."""


class ConfigError(SSAEError):
    """Invalid experiment or training configuration."""


class DataError(SSAEError):
    """Input data cannot be used (bad values, unparsable cells, ...)."""


class ParseError(DataError):
    def __init__(self, message, row=None, col=None):
        if row is not None:
            message = f"{message} (row {row}, col {col})"
        super().__init__(message)
        self.row = row
        self.col = col


class SchemaError(DataError):
    pass


class SplitError(DataError):
    pass


class UndefinedMetricError(SSAEError, ValueError):
    """Metric is mathematically undefined for the given inputs."""

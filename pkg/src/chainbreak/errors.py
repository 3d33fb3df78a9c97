"""Exception types raised across the package."""


class ChainbreakError(Exception):
    """Base class for all package errors."""


class DimensionError(ChainbreakError, ValueError):
    """A vector or matrix does not match the model it is used with."""


class CapacityError(ChainbreakError, ValueError):
    """A request exceeds a hard size limit (enumeration cap, hardware graph size)."""


class ConfigError(ChainbreakError, ValueError):
    """Invalid configuration values."""


class EmbeddingError(ChainbreakError, ValueError):
    """An embedding cannot realize the logical problem."""


class DataError(ChainbreakError, ValueError):
    """Malformed or incomplete input data (samples, profiles, files)."""

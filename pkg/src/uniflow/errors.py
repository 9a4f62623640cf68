"""Exception types shared across the engine."""


class UniflowError(Exception):
    """Base class for engine errors."""


class FormatError(UniflowError):
    """A file does not match its declared binary or JSON layout."""


class DataError(UniflowError):
    """Values violate a contract: non-finite entries, bad ranges, invalid poses."""


class DimensionMismatch(UniflowError):
    """Operands that must share a shape do not."""


class ConfigError(UniflowError):
    """A bundle or request is internally inconsistent."""


class SingularityError(UniflowError):
    """A geometric construction degenerates (e.g. a zero-length ray)."""

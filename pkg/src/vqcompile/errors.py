"""Exception types raised across the package."""


class VQCError(Exception):
    """Base class for all package errors."""


class ParameterArityError(VQCError, ValueError):
    pass


class UnknownGateError(VQCError, KeyError):
    pass


class QubitIndexError(VQCError, IndexError):
    pass


class NotUnitaryError(VQCError, ValueError):
    pass


class UnknownTargetError(VQCError, KeyError):
    pass


class DimensionError(VQCError, ValueError):
    pass


class SizeLimitError(VQCError, ValueError):
    pass


class InvalidStateError(VQCError, ValueError):
    pass


class ConfigError(VQCError, ValueError):
    """A search or CLI configuration is inconsistent."""


class ConsistencyError(VQCError, ArithmeticError):
    """Floating-point result left its admissible range by more than round-off."""

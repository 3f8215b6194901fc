"""Exception types shared across the package.

The split matters at the command line: configuration problems and
numerical failures map to different exit codes (see ``cendre.cli``).
"""


class CendreError(Exception):
    """Base class for package errors."""


class DomainError(CendreError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularityError(CendreError, ArithmeticError):
    """A matrix factorization or rank-one update hit a (near-)singular pivot."""


class ConfigError(CendreError, ValueError):
    """An experiment or dataset configuration is invalid or incomplete."""


class UsageError(CendreError, RuntimeError):
    """An operation was invoked on an object in the wrong state."""

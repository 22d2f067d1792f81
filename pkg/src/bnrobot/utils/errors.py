"""
Exception hierarchy shared by the library and the command line.

Every error raised on purpose by bnrobot derives from ``BNRobotError`` so
callers can catch the whole family, while the more specific classes map
onto distinct CLI exit codes.
"""

from typing import Any, Optional

EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_CAPACITY = 4


class BNRobotError(Exception):
    """Base class for all bnrobot errors."""

    exit_code = EXIT_UNEXPECTED

    def __init__(self, message: str, field: Optional[str] = None, value: Any = None):
        self.field = field
        self.value = value
        if field is not None:
            message = f"{field}={value!r}: {message}"
        super().__init__(message)


class ParameterError(BNRobotError, ValueError):
    """An argument is outside the range an operation accepts."""

    exit_code = EXIT_VALIDATION


class ContractViolation(BNRobotError, ValueError):
    """A precondition between arguments does not hold (e.g. length mismatch)."""

    exit_code = EXIT_VALIDATION


class ConfigurationError(BNRobotError):
    """Configuration values or node-role layouts are invalid."""

    exit_code = EXIT_VALIDATION


class DegenerateBearingError(ParameterError):
    """The robot sits exactly on the light, so no bearing exists."""


class CapacityError(BNRobotError):
    """The request exceeds what an exhaustive computation can handle."""

    exit_code = EXIT_CAPACITY


class NetworkFormatError(BNRobotError):
    """A serialized network or checkpoint could not be parsed."""

    exit_code = EXIT_VALIDATION

    def __init__(self, message: str, field: Optional[str] = None, value: Any = None,
                 line: Optional[int] = None, source: Optional[str] = None):
        self.line = line
        self.source = source
        super().__init__(message, field, value)
        prefix = ""
        if source:
            prefix = f"{source}: "
        if line is not None:
            prefix += f"line {line}: "
        if prefix:
            self.args = (prefix + self.args[0],)


class StorageError(BNRobotError, OSError):
    """Reading or writing an output artifact failed."""

    exit_code = EXIT_IO

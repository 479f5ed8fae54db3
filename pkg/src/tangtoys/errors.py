"""Exception hierarchy.

``ValidationError`` covers bad input (scenarios, configs, log files, capability
mismatches) and maps to CLI exit code 1. ``InvariantViolation`` signals that the
simulator broke one of its own guarantees and maps to exit code 2.
"""


class TangToysError(Exception):
    pass


class ValidationError(TangToysError):
    pass


class InvariantViolation(TangToysError):
    pass


class CapabilityError(ValidationError):
    """A sensor channel or actuator the toy does not have."""

    def __init__(self, message, *, kind=None, channel=None):
        super().__init__(message)
        self.kind = kind
        self.channel = channel


class InsufficientDataError(ValidationError):
    pass


class SensorFaultError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class RegistrationError(ValidationError):
    pass


class PairingError(ValidationError):
    pass


class ClockError(ValidationError):
    pass


class OrderingError(ValidationError):
    pass


class ParseError(ValidationError):
    """Malformed text input; carries the 1-based line (and column, when known)."""

    def __init__(self, message, *, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class ReplayGapError(ValidationError):
    pass

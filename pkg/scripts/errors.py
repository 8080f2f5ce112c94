"""
Spectrum Sensing - Error Types

Every error raised by the toolkit derives from SensingError. The ValueError
branch marks caller mistakes (bad arguments, bad configs); the CLI maps those
to exit status 1 and everything else to exit status 2.
"""


class SensingError(Exception):
    """Base class for all toolkit errors."""


class DomainError(SensingError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(DomainError):
    """An exhaustive computation was asked for more users than it supports."""


class QuorumError(SensingError, ValueError):
    """Trust filtering left no user to fuse."""


class ConfigError(SensingError, ValueError):
    """A run config could not be loaded."""


class ConfigParseError(ConfigError):
    """The config document is not valid YAML."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigValidationError(ConfigError):
    """The config document parsed but a field is missing or invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")

"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class FridgeError(Exception):
    exit_code = 10


class ParameterError(FridgeError, ValueError):
    exit_code = 11


class SingularTemperatureError(FridgeError, ZeroDivisionError):
    exit_code = 12


class DomainError(FridgeError, ValueError):
    exit_code = 13


class InvalidStateError(FridgeError):
    """A matrix failed the Hermiticity, trace or positivity check."""

    exit_code = 14


class PositivityError(InvalidStateError):
    exit_code = 15


class IntegrationError(FridgeError, RuntimeError):
    exit_code = 16


class SteadyStateError(FridgeError, RuntimeError):
    exit_code = 17


class NoMinimumError(FridgeError):
    """Raised when a trajectory has no finite-time temperature minimum."""

    exit_code = 18


class ConfigError(FridgeError):
    exit_code = 2

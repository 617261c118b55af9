"""Typed exceptions shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class NumericalDomainError(ValueError):
    """A numerically computed quantity left its valid domain (e.g. a negative power trace)."""


class UnidentifiableAngleError(RuntimeError):
    """The Fisher information of the echo model is degenerate for the given covariance."""


class ConfigError(ValueError):
    """A config file could not be parsed or holds an out-of-range value."""


class SchemaError(ValueError):
    """A results or solution file is missing required columns or fields."""

"""Shared exception types."""


class InvariantError(ValueError):
    """A state or result violated a numeric invariant beyond tolerance."""


class DomainError(ValueError):
    """Inputs outside the mathematical domain of a closed-form expression."""


class ConfigError(ValueError):
    """Malformed or rejected experiment configuration."""


class TrainingError(RuntimeError):
    """Learning produced non-finite values."""


class VerificationFailure(RuntimeError):
    """A verification run found at least one failing check."""

"""Exceptions raised across the package."""


class TimelessError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(TimelessError, ValueError):
    """Operands have incompatible shapes or partitions."""


class ContractError(TimelessError, ValueError):
    """An input violates a documented precondition (Hermiticity, positivity, ...)."""


class ClockError(TimelessError, ValueError):
    """A clock cannot be constructed or does not support the request."""


class ConstraintError(TimelessError, ValueError):
    """A universe state fails the stationarity constraint it was required to meet."""


class UndefinedRelativeState(TimelessError, ValueError):
    """The clock hand has no support in the universe state."""

    def __init__(self, index, weight):
        super().__init__(f"clock hand {index} has no support (branch weight {weight:.3e})")
        self.index = index
        self.weight = weight


class InsufficientGridError(TimelessError, ValueError):
    """Too few consecutive time points for a finite-difference stencil."""


class ModelViolation(TimelessError, ValueError):
    """The observer record model was driven outside its allowed sequence."""


class ConfigError(TimelessError):
    """Base class for scenario configuration problems."""


class UnknownScenario(ConfigError):
    pass


class InconsistentConfig(ConfigError):
    pass


class UnreadableConfig(ConfigError):
    pass

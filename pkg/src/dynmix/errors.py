"""Exception types shared across the package."""


class SequencingError(ValueError):
    """A loss arrived with a time index other than the one the learner expects."""


class BoundedLossError(ValueError):
    """A loss fell outside [0, 1]."""


class HorizonExhaustedError(RuntimeError):
    """A known-horizon learner was stepped past its horizon."""


class InvalidConfigError(ValueError):
    """A configuration violates a precondition of the component it configures."""

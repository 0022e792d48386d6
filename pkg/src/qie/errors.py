"""Exception hierarchy shared by all engine modules."""


class EngineError(Exception):
    """Base class for every error raised by :mod:`qie`."""


class InvalidParameterError(EngineError, ValueError):
    pass


class InvalidStateError(EngineError, ValueError):
    pass


class ReversibilityViolationError(EngineError):
    """The measurement does not commute with the state and would produce entropy."""


class ProtocolMismatchError(EngineError):
    pass


class InfeasibleDurationError(EngineError, ValueError):
    """Hot-isotherm duration at or below the dissipation time (no net work)."""


class NumericFailureError(EngineError, RuntimeError):
    pass


class BracketError(EngineError, ValueError):
    pass

"""Exception types raised by steerlab."""


class SteerlabError(Exception):
    """Base class for all library errors."""


class DimensionError(SteerlabError, ValueError):
    """Array shapes or subsystem labels do not fit together."""


class ContractError(SteerlabError, ValueError):
    """An input violates an operation's precondition (e.g. non-Hermitian)."""


class ParameterError(SteerlabError, ValueError):
    """A scalar parameter is outside its admissible range."""


class BracketError(SteerlabError, ValueError):
    """The function does not change sign across the supplied bracket."""


class ConvergenceError(SteerlabError, RuntimeError):
    """An iterative maximizer did not converge; ``best`` holds the best value seen."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best

"""Exception hierarchy."""


class HslabError(Exception):
    """Base class for all package errors."""


class DomainError(HslabError, ValueError):
    """An argument lies outside the domain of an operation."""


class PoleError(HslabError, ValueError):
    """Evaluation at a singularity."""


class ParameterError(HslabError, ValueError):
    pass


class DegenerateError(HslabError, ValueError):
    pass


class BranchError(HslabError, ArithmeticError):
    """A square-root or logarithm branch could not be tracked consistently."""


class SingularStartError(HslabError, ValueError):
    pass


class StepError(HslabError, ArithmeticError):
    """Adaptive step size underflow."""


class CriticalLevelError(HslabError, ArithmeticError):
    """A level line runs through a critical point of the potential."""


class SeedError(HslabError, ArithmeticError):
    pass


class UnsupportedDomainError(HslabError, NotImplementedError):
    pass


class AddressError(HslabError, LookupError):
    pass


class AdjacencyError(HslabError, ValueError):
    pass


class WalkOverflowError(HslabError, RuntimeError):
    pass


class InvariantViolation(HslabError, RuntimeError):
    """Erosion state failed a structural invariant.

    ``replay`` carries whatever event data was available when the check failed.
    """

    def __init__(self, message, replay=None):
        super().__init__(message)
        self.replay = replay


class EmptyInterfaceError(HslabError, RuntimeError):
    pass


class OverlapError(HslabError, ValueError):
    pass


class SourceOutsideError(HslabError, ValueError):
    pass


class SolveError(HslabError, ArithmeticError):
    pass


class EmptyCurveError(HslabError, ValueError):
    pass


class MissingDropletError(HslabError, LookupError):
    pass


class ConfigError(HslabError, ValueError):
    pass

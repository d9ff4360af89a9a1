"""Exception hierarchy shared across the library."""


class InfoFlowError(ValueError):
    """Base class for all domain errors raised by this package."""


class InvalidInputError(InfoFlowError):
    """Inputs violate a documented precondition."""


class MaturityError(InfoFlowError):
    """Conditional formulas evaluated too close to the revelation time.

    The T/(T-t) factor is singular at t = T; callers must stay at least
    MATURITY_EPS_FRACTION * T away from maturity.
    """


class DivergenceError(InfoFlowError):
    """A required integral does not converge for the supplied inputs."""


class NoSolutionError(InfoFlowError):
    """An inversion problem has no solution in the admissible range."""


class GreeksUndefinedError(InfoFlowError):
    """Sensitivities requested outside the strike range where they exist."""


class UnsupportedPayoutError(InfoFlowError):
    """Payout structure outside the supported evaluation strategies."""


class DegenerateDistributionError(InfoFlowError):
    """A conditioning event has zero probability mass.

    Carries the tree node whose conditional probability is undefined.
    """

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message)
        self.node = node


#: Conditional formulas refuse t within this fraction of the horizon.
MATURITY_EPS_FRACTION = 1e-9

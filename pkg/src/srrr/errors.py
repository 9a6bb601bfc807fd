"""Exception hierarchy shared by every module in the package."""


class SrrrError(Exception):
    """Base class for all errors raised by :mod:`srrr`."""


class InvalidArgumentError(SrrrError, ValueError):
    """An input violates a documented precondition (shape, sign, range)."""


class UnsupportedPenaltyError(InvalidArgumentError):
    """The requested penalty is not supported by the chosen method."""


class InvalidStateError(SrrrError):
    """An iterate violates an invariant the caller was supposed to maintain."""


class NumericalFailureError(SrrrError, ArithmeticError):
    """A decomposition failed to converge or an objective became non-finite."""


class RankDeficientError(NumericalFailureError):
    """A matrix that must have full column rank does not."""


class DegenerateIterateError(NumericalFailureError):
    """``Y X^T B`` lost rank, so the A-update has no unique solution.

    Attributes
    ----------
    rank : int
        Numerical rank found.
    expected : int
        Rank that was required.
    iteration : int or None
        Outer iteration at which it happened, when raised from a solver loop.
    """

    def __init__(self, rank, expected, iteration=None, message=None):
        self.rank = rank
        self.expected = expected
        self.iteration = iteration
        if message is None:
            message = f"P_A has numerical rank {rank} < {expected}"
            if iteration is not None:
                message += f" at iteration {iteration}"
        super().__init__(message)

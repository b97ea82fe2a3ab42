"""
errors.py

Exception hierarchy shared by every hyperlattice module. Each class carries the
process exit code the command line front end reports for it.
"""


class HyperlatticeError(Exception):
    exit_code = 3


class DomainError(HyperlatticeError, ValueError):
    """A precondition on the inputs is violated (alpha <= 0, q < 3, ...)."""
    exit_code = 2


class NumericError(HyperlatticeError, ArithmeticError):
    """A computation produced non-finite values or hit an iteration cap."""
    exit_code = 3

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class QuadratureError(NumericError):
    pass


class AdmissibilityError(NumericError):
    pass


class IllConditionedError(NumericError):
    """The reference side of a comparison is below the floor."""

    def __init__(self, message, lhs, rhs, **context):
        super().__init__(message, **context)
        self.lhs = lhs
        self.rhs = rhs


class NotAFrameError(DomainError):
    pass


class IdentityCheckFailure(HyperlatticeError):
    exit_code = 1

"""Exception hierarchy shared by all qisdp modules."""


class QisdpError(Exception):
    """Base class for every error raised by this package."""


class InstanceError(QisdpError, ValueError):
    """Invalid instance data or a malformed instance file."""


class DomainViolation(QisdpError, ValueError):
    """A point lies outside the integer domain of some variable."""


class GeneratorError(QisdpError):
    """The random generator could not produce an orthonormal basis."""


class UpdateSingular(QisdpError, ArithmeticError):
    """A low-rank inverse update hit a (numerically) singular pivot."""


class NumericalBreakdown(QisdpError, ArithmeticError):
    """A step search failed even after refreshing the inverse.

    ``diagnostic`` carries a plain dict describing the state at failure.
    """

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class InfeasibleState(QisdpError, ArithmeticError):
    """The dual slack matrix is not positive definite."""


class BudgetExceeded(QisdpError):
    """Enumeration would exceed the oracle budget."""

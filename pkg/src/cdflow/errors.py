"""Exception hierarchy.

Validation problems derive from :class:`ValueError` and numerical failures
from :class:`ArithmeticError`, so callers (and the CLI exit codes) can tell
bad input apart from a solver that gave up.
"""


class CdflowError(Exception):
    """Base class for every error raised by cdflow."""


class ValidationError(CdflowError, ValueError):
    pass


class NumericalFailure(CdflowError, ArithmeticError):
    pass


class NonIntegrable(ValidationError):
    """phi**(-beta) is not integrable on the real line."""


class NonConvex(ValidationError):
    """The weight has no positive uniform lower bound on its second derivative."""


class ShapeMismatch(ValidationError):
    """A grid function was sampled on a different grid."""


class DimensionForbidden(ValidationError):
    """The dimension parameter lies in the forbidden band [0, 1]."""


class OutOfRange(ValidationError):
    """A parameter lies outside the admissible range of a formula."""


class Degenerate(ValidationError):
    """A closed-form constant has a vanishing denominator."""


class NonpositiveCurvature(ValidationError):
    pass


class DegenerateDenominator(ValidationError):
    """The entropy-like denominator of a quotient vanishes (constant f)."""


class NoFeasiblePair(NumericalFailure):
    """No certified (rho, n) with rho > 0 exists in the search box."""


class SolverStall(NumericalFailure):
    pass


class PositivityLost(NumericalFailure):
    pass


class StepRejected(NumericalFailure):
    """The entropy increased along the flow; the time step is too large."""


class LineSearchFail(NumericalFailure):
    pass

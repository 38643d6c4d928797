"""Exception types raised by the solvers.

Every error carries a ``diagnostic`` dict so the CLI can emit a
machine-readable error object.
"""


class OpenUpError(Exception):
    """Base class for all package errors."""

    def __init__(self, message, **diagnostic):
        super().__init__(message)
        self.diagnostic = diagnostic


class ValidationError(OpenUpError):
    """Malformed input (bad JSON document, wrong lengths, bad arcs)."""


class DegenerateSpec(ValidationError):
    """Prescribed points or values are not pairwise distinct."""


class NumericalError(OpenUpError):
    """Internal numerical failure."""


class RootFindingError(NumericalError):
    """Polynomial root refinement did not reach the residual target."""


class JacobianSingular(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class MultiplePole(NumericalError):
    """Denominator has a repeated root; partial fractions are not simple."""


class StalledAlternation(NumericalError):
    pass


class PathCollision(NumericalError):
    """Every sampled homotopy segment passed too close to a value collision."""


class BranchJump(NumericalError):
    """Boundary tracing landed on the wrong sheet even after refinement."""


class NoSolutionFound(OpenUpError):
    """All homotopy starts failed."""


class NoOpeningSolution(OpenUpError):
    """No candidate map passed the open-up verification."""

"""Exception types shared across the package."""


class GrsError(Exception):
    """Base class for all package-specific errors."""


class BadDimension(GrsError):
    """A summand dimension d_i is not a positive integer."""


class DuplicateWeight(GrsError):
    """Two weight vectors of an orbit coincide."""


class ZeroCoefficient(GrsError):
    """A scalar-curvature coefficient A_w is zero (or not exactly rational)."""


class DimensionMismatch(GrsError):
    """A vector has the wrong length for the orbit it is used with."""


class OverflowGuard(GrsError):
    """An exponential coordinate exceeded the safe evaluation range."""


class BadParams(GrsError):
    """Parameters outside the stated domain of a family or operation."""


class InconsistentSystem(GrsError):
    """A quadratic superpotential system has a violated equation.

    Carries the offending level and the mismatch so reports can show the
    first failing residual term.
    """

    def __init__(self, message, level=None, equation=None):
        super().__init__(message)
        self.level = level
        self.equation = equation


class RecursionObstructed(GrsError):
    """First-integral recursion hit an unresolvable right-hand side."""

    def __init__(self, message, level=None, remainder=None):
        super().__init__(message)
        self.level = level
        self.remainder = remainder


class StepUnderflow(GrsError):
    """Adaptive integration could not take even one acceptable step."""

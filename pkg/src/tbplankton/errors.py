"""Exception hierarchy shared by all modules."""


class PlanktonError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PlanktonError, ValueError):
    """A parameter or configuration value violates its invariant."""


class ArgumentDomainError(PlanktonError, ArithmeticError):
    """A fractional power of a negative prey density was requested."""


class EvaluationError(PlanktonError, ArithmeticError):
    """A model quantity evaluated to NaN or infinity."""


class DomainError(PlanktonError, ValueError):
    """A state lies outside the open positive quadrant."""


class UnsupportedExponent(PlanktonError, ValueError):
    """An integer-only construction received a non-integer exponent."""


class RootSearchError(PlanktonError, RuntimeError):
    """No sign change of a polynomial was found in the scanned interval."""


class InconclusiveError(PlanktonError, RuntimeError):
    """A trajectory is too short for the classifier's analysis windows."""

"""Exception types shared across the package."""


class CFCocycleError(Exception):
    """Base class for package-specific errors."""


class DegenerateMatrixError(CFCocycleError):
    """Matrix is rank deficient, orientation reversing, or zero where a
    full-rank, positively oriented matrix is required."""


class DegenerateStateError(CFCocycleError):
    """Numerator and denominator of a convergent vanished simultaneously."""


class InvalidCFError(CFCocycleError):
    """Continued-fraction elements violate a structural requirement."""


class TransversalityError(CFCocycleError):
    """A zero of the generator fails the transversal-crossing requirement."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DeltaTooLargeError(CFCocycleError):
    """Neighborhood radius too large: regions overlap or a hit is ambiguous."""


class HorizonExceededError(CFCocycleError):
    """An orbit scan ran out of iterations before the sought event."""

    def __init__(self, message, closest_approach=None):
        super().__init__(message)
        self.closest_approach = closest_approach


class CollisionStructureError(CFCocycleError):
    """The collision successor map is not a disjoint union of cycles."""


class RootBracketError(CFCocycleError):
    """Root bracketing found no sign change, or more than one."""


class NoSplittingError(CFCocycleError):
    """No hyperbolic splitting: stable/unstable directions unavailable."""


class SchemaError(CFCocycleError):
    """Problem description failed validation; message names the field."""

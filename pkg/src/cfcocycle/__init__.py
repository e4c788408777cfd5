"""Convergence analysis for real and functional continued fractions via
2x2 transfer-matrix products and hyperbolicity certificates."""

__version__ = "0.1.0"

from .errors import (
    CFCocycleError,
    CollisionStructureError,
    DegenerateMatrixError,
    DegenerateStateError,
    DeltaTooLargeError,
    HorizonExceededError,
    InvalidCFError,
    NoSplittingError,
    RootBracketError,
    SchemaError,
    TransversalityError,
)

__all__ = [
    "CFCocycleError",
    "CollisionStructureError",
    "DegenerateMatrixError",
    "DegenerateStateError",
    "DeltaTooLargeError",
    "HorizonExceededError",
    "InvalidCFError",
    "NoSplittingError",
    "RootBracketError",
    "SchemaError",
    "TransversalityError",
    "__version__",
]

"""Coherent-state quantization, Gibbs states and their classical limits at desk scale."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BoundViolation,
    CapacityError,
    ConfinementError,
    ConvergenceError,
    GridOrderError,
    SemigibbsError,
)
from .polynomials import Polynomial, X, Y, Z, poisson_bracket  # noqa: E402

__all__ = [
    "__version__",
    "Polynomial",
    "X",
    "Y",
    "Z",
    "poisson_bracket",
    "SemigibbsError",
    "CapacityError",
    "GridOrderError",
    "ConvergenceError",
    "ConfinementError",
    "BoundViolation",
]

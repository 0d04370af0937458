class SemigibbsError(Exception):
    """Base class for library errors."""


class CapacityError(SemigibbsError):
    """Requested size exceeds what the dense brute-force path supports."""


class GridOrderError(SemigibbsError):
    """Quadrature grid is too coarse for an exact Berezin integral."""


class ConvergenceError(SemigibbsError):
    """An iterative procedure (refinement, optimizer, fixed point) did not converge."""


class ConfinementError(SemigibbsError):
    """Box or grid does not confine the problem well enough."""


class BoundViolation(SemigibbsError):
    """A proven inequality failed numerically beyond its slack."""

"""Exception types shared across the package."""


class IntervalDivisionError(ZeroDivisionError):
    """Divisor interval contains zero; caller decides whether this means a collision."""


class DomainError(ValueError):
    """Argument interval lies outside the domain of the requested function."""


class ShapeError(ValueError):
    """Interval matrix/vector shapes do not conform."""


class EmptyIntervalError(ValueError):
    """Arithmetic attempted on the empty interval."""


class CollisionPossible(ValueError):
    """A pairwise distance enclosure contains zero, so the expression is singular on the box."""


class SingularMidpoint(ValueError):
    """Midpoint Jacobian failed LU with partial pivoting (pivot below threshold)."""


class RefusedUnequalMasses(ValueError):
    """The requested normalization is only valid for equal masses."""

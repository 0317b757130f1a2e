"""Exception types raised across the package."""


class CurvedisError(Exception):
    """Base class for all library errors."""


class ManifoldMismatchError(CurvedisError, ValueError):
    """Two objects live on different manifolds."""


class InvalidPointError(CurvedisError, ValueError):
    """Coordinates violate the invariants of a manifold point or tangent vector."""


class CutLocusError(CurvedisError, ArithmeticError):
    """The logarithm is undefined because ``y`` lies in the cut locus of ``x``."""

    def __init__(self, message="cut locus"):
        super().__init__(message)


class NonsmoothPointError(CurvedisError, ArithmeticError):
    """A penalty segment is active at coincident points, where dist is not differentiable."""

    def __init__(self, message="nonsmooth point"):
        super().__init__(message)


class IndexMismatchError(CurvedisError, ValueError):
    """A frequency index does not belong to the given manifold."""


class UnsupportedError(CurvedisError, ValueError):
    """The requested operation has no implementation for this manifold."""


class DegenerateInputError(CurvedisError, ValueError):
    """Input data is empty, all zero or otherwise unusable."""


class AliasingError(CurvedisError, ValueError):
    """The requested degree is too large for the sampling grid."""


class LineSearchError(CurvedisError, RuntimeError):
    """Base class for line search failures."""


class NotDescentDirectionError(LineSearchError):
    def __init__(self, message="not a descent direction"):
        super().__init__(message)


class LineSearchFailedError(LineSearchError):
    def __init__(self, message="line search failed"):
        super().__init__(message)


class NotInvertibleError(CurvedisError, ValueError):
    def __init__(self, message="not invertible"):
        super().__init__(message)


class ConfigError(CurvedisError, ValueError):
    """Invalid configuration value."""

"""Exception types shared across the package."""


class KohnError(Exception):
    """Base class for all errors raised by this package."""


class NonConvergence(KohnError):
    """The ODE oracle could not extract a phase shift reliably."""


class QuadratureNotConverged(KohnError):
    """Doubling the quadrature node count changed a matrix element too much."""


class SingularMatrix(KohnError):
    """A pivot of the dense factorization fell below the singularity floor."""


class DegenerateLimit(KohnError):
    """det(A) and adj(A)b vanish together; no cotangent limit exists."""


class InsufficientData(KohnError):
    """Too few grid points produced a solvable system."""


class NoAnomalyFreeRoot(KohnError):
    """No singular tau was classified anomaly-free at this momentum."""


class DegenerateSystem(KohnError):
    """All three determinant coefficients vanish; no consistent phase exists."""


class ConfigError(KohnError):
    """A run configuration file or override is invalid."""

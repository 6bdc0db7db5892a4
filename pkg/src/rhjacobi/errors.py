"""Exception types shared across the package."""


class AlgorithmError(Exception):
    """Base class for numerical-algorithm failures."""


class InvalidDomainError(AlgorithmError):
    """Degenerate or otherwise unusable interval/arc."""


class EvaluationError(AlgorithmError):
    """A sampled function returned a non-finite value."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class SideRequiredError(AlgorithmError):
    """Evaluation point lies on a jump contour and no side was given."""


class GeometryError(AlgorithmError):
    """Contour arcs overlap or discs collide."""


class IllPosedDiscretizationError(AlgorithmError):
    """Collocation matrix is numerically singular; refine or re-truncate."""


class SupportSolveError(AlgorithmError):
    """Newton iteration for the support endpoints did not converge."""


class MultiIntervalSupportError(AlgorithmError):
    """Equilibrium density went negative: support is not a single interval."""


class ScalingFailureError(AlgorithmError):
    """Root-finding for the weight scaling constants failed."""


class NonNormalizableWeightError(AlgorithmError):
    """Q(x) does not grow to +infinity on both sides."""


class AssemblyOverflowError(AlgorithmError):
    """exp(n*ell/2) overflows; use the log-space accessors instead."""


class ExtractionInconsistencyError(AlgorithmError):
    """Recurrence-coefficient extraction produced invalid values."""


class RowComputationError(AlgorithmError):
    """A per-row pipeline failure, tagged with the row index."""

    def __init__(self, n, cause):
        super().__init__(f"row n={n}: {cause}")
        self.n = n
        self.cause = cause

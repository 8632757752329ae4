"""Exception types shared across the toolkit."""


class AdsError(Exception):
    """Base class for all toolkit errors."""


class InvalidPoint(AdsError):
    """Vector cannot be normalized onto the unit quadric."""


class InvalidIsometry(AdsError):
    """Matrix does not preserve the ambient quadratic form."""


class DegeneratePlane(AdsError):
    """Spanning vectors are linearly dependent."""


class BadTangent(AdsError):
    """Tangent vector violates the orthogonality or normalization preconditions."""


class OutsideDomain(AdsError):
    """Point is outside the affine chart domain."""


class OutsideAffineDomain(AdsError):
    """Causal query point is outside the affine domain of the base point."""


class RescaleImpossible(AdsError):
    """Curve coefficients cannot be rescaled to the requested Lipschitz bound."""


class DegenerateCloud(AdsError):
    """Point cloud is not full-dimensional."""


class FlatCurve(AdsError):
    """Boundary curve is flat (contained in a totally geodesic plane)."""


class EpsTooLarge(AdsError):
    """Neighborhood parameter is outside (0, pi/2)."""


class EpsBudgetExceeded(AdsError):
    """Neighborhood surface escaped the black domain of the curve."""


class DeltaTooCoarse(AdsError):
    """Sampling density too coarse for side classification of the hull."""


class NotConvexInput(AdsError):
    """Height field fails the discrete convexity test."""


class NotSpacelikeHere(AdsError):
    """Surface is not spacelike at the queried node."""


class NotSpacelike(AdsError):
    """Surface is not spacelike (induced metric not positive definite)."""


class NotInU(AdsError):
    """Matrix is not in the spacelike-orbit component (a, b, d > 0 > c)."""


class Diverged(AdsError):
    """Relaxation residual blew up."""


class NotConverged(AdsError):
    """Relaxation hit the iteration cap before reaching tolerance."""


class PipelineFailed(AdsError):
    """Barrier pipeline failed; carries the failing stage tag."""

    def __init__(self, stage, message=""):
        self.stage = stage
        super().__init__(f"stage {stage!r}: {message}" if message else f"stage {stage!r}")

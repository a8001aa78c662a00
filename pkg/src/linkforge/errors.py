"""Exception hierarchy shared by all solver modules."""


class LinkforgeError(Exception):
    """Base class for every error raised by linkforge."""


class InvalidLinkage(LinkforgeError, ValueError):
    pass


class EmptyModuliSpace(InvalidLinkage):
    """The longest side is not shorter than the sum of the others."""


class Degenerate(InvalidLinkage):
    """The linkage admits a fully collinear configuration."""


class TriangleViolation(LinkforgeError, ValueError):
    pass


class NotOnCurve(LinkforgeError, ValueError):
    pass


class DegenerateConfig(LinkforgeError, ValueError):
    pass


class PoleHit(LinkforgeError, ValueError):
    """A charged pair coincides and the potential is singular."""


class InvalidAlpha(LinkforgeError, ValueError):
    pass


class NumericalFailure(LinkforgeError, RuntimeError):
    pass


class TangentVertical(NumericalFailure):
    pass


class NotConvex(LinkforgeError, ValueError):
    pass


class BoundaryConfiguration(NotConvex):
    """Target sits on the boundary of the convex region.

    ``limit`` carries the charge the stabilizer tends to there (0 or inf).
    """

    def __init__(self, message: str, limit: float):
        super().__init__(message)
        self.limit = limit


class NotStrictlyConvex(NotConvex):
    pass


class ChartBoundary(LinkforgeError, ValueError):
    pass


class QuadraticDegenerate(NumericalFailure):
    pass


class NotAligned(LinkforgeError, ValueError):
    pass


class MaxIterExceeded(NumericalFailure):
    pass

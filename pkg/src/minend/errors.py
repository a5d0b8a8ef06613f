"""Exception hierarchy shared by all modules."""


class MinendError(Exception):
    """Base class for every error raised by minend."""


# hyp2
class OutsideDisk(MinendError, ValueError):
    pass


class CoincidentPoints(MinendError, ValueError):
    pass


class IntersectingGeodesics(MinendError, ValueError):
    pass


class AsymptoticGeodesics(MinendError, ValueError):
    pass


class DegenerateSpacing(MinendError, ValueError):
    pass


# hopf
class RealPeriodInHeight(MinendError, ValueError):
    """Re a_{-1} != 0: the height function would not be single valued."""


class ZeroPolynomial(MinendError, ValueError):
    """The polynomial part of sqrt(phi) vanishes identically; no such end exists."""


class OriginPole(MinendError, ValueError):
    pass


class PathThroughOrigin(MinendError, ValueError):
    pass


class PathThroughZeroOfPhi(MinendError, ValueError):
    pass


class NoConvergence(MinendError, RuntimeError):
    pass


class InsideCore(MinendError, ValueError):
    pass


class TooClose(MinendError, ValueError):
    pass


# levelset
class RadiusTooSmall(MinendError, ValueError):
    pass


class StagnantTrace(MinendError, RuntimeError):
    pass


class LeftWorkingAnnulus(MinendError, RuntimeError):
    pass


class AmbiguousClassification(MinendError, ValueError):
    pass


# sinhgordon
class DegenerateExtent(MinendError, ValueError):
    pass


class NewtonDiverged(MinendError, RuntimeError):
    def __init__(self, message, last_iterate=None, history=()):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.history = list(history)


class NotConverged(MinendError, ValueError):
    pass


# reconstruct
class DegenerateRegion(MinendError, ValueError):
    pass


class FrameDrift(MinendError, RuntimeError):
    pass


# analyze
class TailNotConverged(MinendError, ValueError):
    pass


class CurvatureHypothesisViolated(MinendError, ValueError):
    pass


class InsufficientSpan(MinendError, ValueError):
    pass


# cli
class ConfigInvalid(MinendError, ValueError):
    pass


class StageFailed(MinendError, RuntimeError):
    def __init__(self, stage, diagnostic):
        super().__init__(f"stage {stage!r} failed: {diagnostic}")
        self.stage = stage
        self.diagnostic = diagnostic


class EmptyInput(MinendError, ValueError):
    pass

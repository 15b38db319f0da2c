"""Exception types raised across the package."""


class KnotDistError(Exception):
    """Base class for all package errors."""


class DomainError(KnotDistError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateCurveError(KnotDistError, ValueError):
    """Repeated vertices, zero-length edges or folded-back spikes."""


class SelfIntersectionError(KnotDistError):
    """Two non-adjacent edges touch, so the distortion is infinite."""


class LinkError(DomainError):
    """Winding numbers are not coprime; the construction would be a link."""


class ResolutionError(KnotDistError):
    """Too few vertices to realise an embedded polygon."""


class TubeRadiusError(KnotDistError):
    """Offset tube radius too large for the tube to stay embedded."""


class DegenerateLevelError(KnotDistError):
    """A level set passes exactly through a vertex; jitter the level."""


class BoundViolationError(KnotDistError, AssertionError):
    """A proven inequality failed numerically. Always a bug in the inputs or code."""

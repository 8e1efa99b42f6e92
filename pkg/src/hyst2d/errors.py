"""Semantic exception types shared across the package.

Every error raised by the library derives from :class:`HysteresisError`, so
callers (and the CLI) can separate model failures from programming errors.
"""


class HysteresisError(Exception):
    """Base class for all model-level errors."""


class OutsideDomain(HysteresisError):
    """A point (or a signal sample) lies outside the open domain."""


class NotAdmissible(HysteresisError):
    """A relay parameter pair whose region families do not cover the domain."""


class EmptyCurve(HysteresisError):
    """A requested level curve does not intersect the domain."""


class DegenerateGap(HysteresisError):
    """The inter-curve distance of a relay pair is below the admitted minimum."""


class AdmissibilityViolation(HysteresisError):
    """An input reached the region where both families report an exit.

    This is a hard internal error: it can only happen when the curve families
    fail the covering property the relay construction assumes.
    """


class NotPiecewiseMonotone(HysteresisError):
    """Reduced signal oscillates faster than the configured resolution cap."""


class EmptyRegion(HysteresisError):
    """Grid construction found no admissible cells."""


class GridTooCoarse(HysteresisError):
    """A lattice is too small for the requested finite-difference stencils."""


class SingularJacobian(HysteresisError):
    """Change-of-variables factor vanished on the identification lattice."""


class NoIntersection(HysteresisError):
    """A level curve does not cross the given transversal curve."""


class NoRoot(HysteresisError):
    """Curve recovery found no bracket for the requested level."""


class AmbiguousRoot(HysteresisError):
    """Curve recovery found multiple brackets for the requested level."""


class UnsupportedFoliation(HysteresisError):
    """Operation requires structure this foliation kind does not provide."""


class FoliationConditionViolation(HysteresisError):
    """Sampled data contradicts the nesting/ordering conditions of the family."""


class SignalError(HysteresisError):
    """Malformed input signal (timestamps, shape, or values)."""


class ConfigError(Exception):
    """Configuration file is syntactically or semantically invalid.

    Carries a dotted field path when the offending entry is known; the CLI
    maps this class (and only this class) to exit code 2.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)

"""Exception types shared across the package."""


class MstringError(Exception):
    """Base class for all package-specific failures."""


class SlopeTooLarge(MstringError):
    """The boundary moves at or above the wave speed (|a'| >= 1)."""


class DegenerateSlopes(MstringError):
    """l1 == l2: the two-slope closed forms divide by l1 - l2."""


class ConjugacyResidualTooLarge(MstringError):
    """Internal consistency failure while building the conjugacy."""


class UnsupportedKind(MstringError):
    """Operation not available for this map/conjugacy kind."""


class BoundsUnavailable(MstringError):
    """Positive damping bounds require l1 < l2."""


class OutOfDomain(MstringError):
    """Point outside the moving space-time domain."""


class OutOfStrip(MstringError):
    """Point outside the flattened strip."""


class BeforeInitialTime(MstringError):
    """Characteristic coordinate predates the initial data."""


class IncompatibleData(MstringError):
    """Initial data violates the boundary compatibility conditions."""


class SingularAtOrigin(MstringError):
    """Radial data does not vanish fast enough at r = 0."""


class DeltaOutOfRange(MstringError):
    """Lyapunov parameter delta outside (0, 1/rho)."""


class IllConditionedGramian(MstringError):
    """HUM Gramian condition number above threshold."""


class HorizonTooShort(MstringError):
    """Control horizon below the critical observability time."""


class WrongSlopeOrder(MstringError):
    """Moving-boundary control synthesis requires l1 > l2."""


class ConfigError(MstringError):
    """Malformed experiment configuration."""

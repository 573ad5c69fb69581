"""Exception hierarchy shared by the solver modules."""


class HnlsError(Exception):
    """Base class for all library errors."""


class ParameterError(HnlsError, ValueError):
    """Invalid PDE coefficients or configuration values."""


class OnBranchCut(HnlsError):
    """A spectral point lies on (or within tolerance of) a square-root branch cut."""


class NegativeRadicand(HnlsError):
    """The contour parameter lambda is too small for the requested endpoints."""


class OutOfInterval(HnlsError, ValueError):
    """A contour parameter lies outside the segment's interval."""


class TruncationInsufficient(HnlsError):
    """The truncated contour tail is not below the requested tolerance."""


class UpperHalfPlane(HnlsError, ValueError):
    """A half-line transform was requested at Im k > 0."""


class TailTooLarge(HnlsError):
    """Sampled data does not decay at the truncation point."""


class ExponentOutOfRange(HnlsError, ValueError):
    """A Sobolev-type exponent lies outside its admissible range."""


class RangeViolation(HnlsError, ValueError):
    """(s, p) outside the low-regularity Strichartz range."""


class HalfExcluded(HnlsError, ValueError):
    """s = 1/2 is excluded from the time-estimate exponent."""


class TimeZero(HnlsError, ValueError):
    """A dispersive kernel was requested at t = 0."""


class GridMismatch(HnlsError, ValueError):
    """Input grids are not aligned."""


class DegenerateSymmetry(HnlsError):
    """nu+ and nu- coincide, so the boundary transforms cannot be reconstructed."""


class NoContraction(HnlsError):
    """The Picard iteration failed to contract even on the minimal horizon."""


class IncompatibleData(HnlsError, ValueError):
    """Initial and boundary data violate u0(0) = g(0) where continuity is required."""


class RegularityGate(HnlsError, ValueError):
    """(s, p) violates the regularity conditions of the well-posedness theory."""


class CFLViolation(HnlsError):
    """Reference solver step is far beyond the explicit stability limit (diagnostic)."""


class InnerSolveDiverged(HnlsError):
    """The nonlinear inner fixed-point solve of the reference scheme diverged."""


class ConfigError(HnlsError, ValueError):
    """Configuration file is missing keys or holds invalid values."""

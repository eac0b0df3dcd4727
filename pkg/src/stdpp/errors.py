"""Exception types shared across the stdpp modules."""


class StdppError(Exception):
    """Base class for stdpp-specific failures."""


class InvalidParameterError(StdppError, ValueError):
    """A parameter violates a hard precondition (sign, range, finiteness)."""


class InvalidModelError(StdppError, ValueError):
    """The model fails the existence check and the operation requires validity."""


class UnsupportedFamilyError(StdppError, ValueError):
    """The requested operation has no implementation for this kernel family."""


class GridTooCoarseError(StdppError, RuntimeError):
    """Numeric inversion could not reach the requested tolerance on the grid."""


class TruncationError(StdppError, RuntimeError):
    """Discarded spectral mass exceeds the configured tolerance."""


class RejectionBudgetError(StdppError, RuntimeError):
    """The conditional rejection sampler exhausted its proposal budget."""


class SizeLimitError(StdppError, ValueError):
    """Input exceeds a documented library guard."""


class WindowError(StdppError, ValueError):
    """Observation window is degenerate or incompatible with the request."""


class BandwidthError(StdppError, ValueError):
    """Smoothing bandwidths are non-positive or too large for the window."""


class InfeasibleBoundsError(StdppError, ValueError):
    """No valid model exists inside the supplied parameter bounds."""

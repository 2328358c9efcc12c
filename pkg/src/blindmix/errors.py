"""Exception hierarchy shared by every blindmix module."""


class BlindMixError(Exception):
    """Base class for all library errors."""


class ShapeError(BlindMixError, ValueError):
    """Array dimensions are inconsistent with the problem sizes."""


class InvalidSymbolError(BlindMixError, ValueError):
    """A QAM symbol index lies outside ``0..15``."""


class UnsupportedSizeError(BlindMixError, ValueError):
    """No Hadamard construction exists for the requested order."""


class DegeneratePointError(BlindMixError):
    """A factor reached the origin, which is excluded from the manifold."""


class DivergenceError(BlindMixError):
    """The objective became NaN or infinite."""


class InitializationError(BlindMixError):
    """Spectral initialization received a degenerate observation."""


class StalledStepError(BlindMixError):
    """FIHT step size is undefined (zero denominator, nonzero numerator)."""


class ModelDecreaseError(BlindMixError):
    """The trust-region subproblem failed to decrease the quadratic model."""

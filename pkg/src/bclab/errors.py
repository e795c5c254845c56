"""Exception types shared across the package."""


class BclError(Exception):
    """Base class for every error raised by bclab."""


class DomainError(BclError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class TruncationError(BclError):
    """Probability mass lost to the Fock cutoff exceeds the allowed budget."""


class SpectrumError(BclError):
    """A density matrix has an eigenvalue too negative to be truncation jitter."""


class QuadratureError(BclError):
    """A quadrature grid is too coarse for the requested accuracy."""


class ResourceError(BclError):
    """A dense two-mode object would exceed the configured size cap."""

"""Exception types raised across the package."""


class BckoscError(Exception):
    """Base class for all package-specific errors."""


class OutOfDomain(BckoscError):
    """A tabulated time function was evaluated outside its sample range."""


class ParseError(BckoscError):
    """A scenario document could not be parsed."""


class ValidationError(BckoscError):
    """A scenario violates a structural constraint (bad grid, bad window, ...)."""


class InvalidIC(BckoscError):
    """Initial conditions could not be resolved (e.g. overdamped defaults)."""


class StepSizeUnderflow(BckoscError):
    """The adaptive integrator drove the step size below the representable floor."""


class DegenerateSolutions(BckoscError):
    """The amplitude solution and its conjugate are linearly dependent (Wronskian ~ 0)."""


class GammaVanishes(BckoscError):
    """gamma <= 0 where a positive envelope is required (division by gamma)."""


class OmegaNotPositive(BckoscError):
    """The conserved normalization Omega is not real positive for this frame."""


class GridTooNarrow(BckoscError):
    """The spatial grid does not contain the wavefunction envelope.

    Carries ``suggested_qmax``, the half-width that would satisfy the
    adequacy rule for the requested state.
    """

    def __init__(self, message, suggested_qmax=None):
        super().__init__(message)
        self.suggested_qmax = suggested_qmax


class DegreeTooLarge(BckoscError):
    """Hermite degree beyond the supported range (n > 200)."""


class InsufficientSlices(BckoscError):
    """A time series needs at least three uniformly spaced slices."""


class SolverBreakdown(BckoscError):
    """The tridiagonal solve hit a vanishing pivot (should not occur for CN)."""


class NotUnderdamped(BckoscError):
    """Closed forms requested for parameters with g^2 >= omega^2."""


class UnsupportedForceShape(BckoscError):
    """Closed forms requested for a drive outside the supported family."""

"""Exception types shared across the package."""


class AttenoPatError(Exception):
    """Base class for all package-specific errors."""


class NoConvergence(AttenoPatError):
    """An iterative solve exhausted its iteration budget."""


class PoleProximity(AttenoPatError):
    """An iterate or evaluation point came too close to a pole of the
    attenuation coefficient's continuation."""


class GrowthBudgetExceeded(AttenoPatError):
    """Evaluating a Fourier-Laplace sum would require an exponential factor
    beyond the configured (or hard overflow) budget."""


class QuadratureTooCoarse(AttenoPatError):
    """Self-check failed: refining the source quadrature changed the result
    by more than the allowed tolerance."""


class TruncationNotConverged(AttenoPatError):
    """The last retained series term is not negligible against the sum."""


class SeriesNotConverged(AttenoPatError):
    """Kernel series truncation failed its tail criterion."""


class NotConverged(AttenoPatError):
    """Linear-solve iteration diverged.  Carries the residual trace."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class EvennessViolation(AttenoPatError):
    """A spectral field that must be even in its first axis is not."""


class GridMismatch(AttenoPatError):
    """Two gridded objects do not live on compatible grids."""


class ConfigError(AttenoPatError):
    """A run configuration failed schema validation or is inconsistent."""

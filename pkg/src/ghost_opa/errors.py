"""Exception hierarchy shared by all ghost-opa modules.

Exit-code mapping used by the CLI:
  UsageError -> 2, NumericalToleranceError / QuadratureError -> 3,
  ResourceLimitError -> 4.
"""


class GhostOpaError(Exception):
    """Base class for all package errors."""


class UsageError(GhostOpaError):
    """Invalid configuration or command-line input."""


class ApproximationRegimeError(GhostOpaError):
    """A stated approximation regime is violated (e.g. the wide-band
    time-window product is below the enforced threshold)."""


class NumericalToleranceError(GhostOpaError):
    """A self-check or diagnostic failed its numerical tolerance."""


class QuadratureError(NumericalToleranceError):
    """Adaptive quadrature did not reach the requested tolerance.

    Carries the best value and the error estimate at the point of failure.
    """

    def __init__(self, message: str, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class ResourceLimitError(GhostOpaError):
    """A computation would exceed a hard resource bound."""

"""
Error types shared across the engine.

Numerical operations raise; the orchestrators (run, verify, the API) catch
ChiralKKError and turn it into a failed check or an error response.
"""


class ChiralKKError(ValueError):
    """Base class for every error raised by this package."""


class DegenerateMetricError(ChiralKKError):
    """|det Γ| fell below the degeneracy tolerance."""


class NotTimelikeError(ChiralKKError):
    """The induced metric has the wrong signature for the analysis mode."""


class FrameConstructionError(ChiralKKError):
    """Fewer independent normal candidates than the codimension."""


class ContractViolation(ChiralKKError):
    """An operation was called with inputs outside its contract."""


class ConfigError(ChiralKKError):
    """Scenario configuration failed validation."""


class CFLViolation(ChiralKKError):
    """Time step too large for the leapfrog scheme."""


class RunAborted(ChiralKKError):
    """A module error interrupted an evolution run."""

    def __init__(self, tau, cause):
        super().__init__(f"run aborted at tau={tau:.17g}: {cause}")
        self.tau = tau
        self.cause = cause

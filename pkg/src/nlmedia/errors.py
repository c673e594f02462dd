"""Shared exception types."""


class NlmediaError(Exception):
    """Base class for all package errors."""


class ModelValidityError(NlmediaError):
    """A medium model violates a physical validity condition
    (e.g. non-absorbing parameters, wrong sign of a loss function)."""


class PositivityError(NlmediaError):
    """A kernel that must be positive semidefinite has an eigenvalue below
    the discretization floor."""


class SingularityError(NlmediaError):
    """Evaluation hit a pole or an on-shell singularity."""


class IllConditionedError(NlmediaError):
    """A linear operation exceeded its conditioning budget."""


class GuidedWaveError(SingularityError):
    """A tangential block inverse is singular at real (q, w): a guided-wave
    resonance.  Reported, never regularized."""


class AccuracyError(NlmediaError):
    """A quadrature error estimate exceeds the requested tolerance."""


class ResolutionError(NlmediaError):
    """A sampling grid is too coarse for the requested operation."""


class LayoutError(NlmediaError):
    """Incompatible grid/cell layout."""


class ConfigError(NlmediaError):
    """Scenario configuration is invalid; message names the field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(NlmediaError):
    """An argument lies outside the operation's geometric domain."""

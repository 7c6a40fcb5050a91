"""
Error hierarchy for the inference engine.
Domain layer - no external dependencies.
"""


class R2omcError(Exception):
    """Base class for every error raised by the inference engine."""


class SchemaError(R2omcError, ValueError):
    """Parameter or noise dimensions do not match the simulator's schema."""


class CapabilityError(R2omcError):
    """The simulator does not offer the requested capability (e.g. an analytic Jacobian)."""


class NoInformativeDimensionsError(R2omcError, ValueError):
    """The sensitivity mask deactivated every output dimension."""


class EmptyAcceptedSetError(R2omcError, ValueError):
    """No optimization record was accepted, so no ε or proposal can be formed."""


class ProposalConsistencyError(R2omcError):
    """A draw from the proposal mixture has zero proposal density."""


class ZeroWeightsError(R2omcError):
    """Every importance weight is zero."""

    def __init__(self, message: str = "All importance weights are zero; increase epsilon or the candidate count P"):
        super().__init__(message)


class OracleUnavailableError(R2omcError):
    """The problem has no ground-truth sampler of the requested kind."""


class DegenerateFeaturesError(R2omcError, ValueError):
    """Every feature has zero variance in both sample sets."""


class ConfigurationError(R2omcError, ValueError):
    """An experiment configuration is invalid."""

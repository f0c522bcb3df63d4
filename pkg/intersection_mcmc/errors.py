"""
Exception types for intersection-mcmc.
"""


class IntersectionMcmcError(ValueError):
    """Base error for everything the library reports about bad input or state."""


class ConfigError(IntersectionMcmcError):
    """Invalid configuration value or configuration file."""


class DatasetParseError(IntersectionMcmcError):
    """Malformed dataset, ground-truth or map document."""

    def __init__(self, path: str, detail: str):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")


class InitializationError(IntersectionMcmcError):
    """A chain was started from a state the posterior rules out."""


class EstimationError(IntersectionMcmcError):
    """Estimation cannot proceed with the given measurements or model."""


class GenerationError(IntersectionMcmcError):
    """Synthetic generation exhausted its retry budget."""


class LaneletModelError(IntersectionMcmcError):
    """A lanelet model with asymmetric sharing or dangling references."""

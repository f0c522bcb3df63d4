"""
Lane-level intersection topology and lane-course estimation from trajectories
and detections with two annealed MCMC stages.
"""

from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    DatasetParseError,
    EstimationError,
    GenerationError,
    InitializationError,
    IntersectionMcmcError,
)
from .lanes import estimate_lane_course
from .pipeline import estimate_intersection
from .topology import estimate_topology, update_topology

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "load_config",
    "ConfigError",
    "DatasetParseError",
    "EstimationError",
    "GenerationError",
    "InitializationError",
    "IntersectionMcmcError",
    "estimate_lane_course",
    "estimate_intersection",
    "estimate_topology",
    "update_topology",
]

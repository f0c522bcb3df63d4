"""
Stage 1: lane-level topology estimation.
"""

from .estimator import estimate_topology, initial_topology, update_topology
from .proposals import apply_move, is_valid, propose_topology
from .rays import lane_center_ray, lane_table, lateral_offset, mouth_distance
from .scoring import (
    MeasurementBatch,
    log_likelihood_point,
    log_likelihoods,
    log_posterior_topology,
    log_prior_topology,
)

__all__ = [
    "estimate_topology",
    "initial_topology",
    "update_topology",
    "apply_move",
    "is_valid",
    "propose_topology",
    "lane_center_ray",
    "lane_table",
    "lateral_offset",
    "mouth_distance",
    "MeasurementBatch",
    "log_likelihood_point",
    "log_likelihoods",
    "log_posterior_topology",
    "log_prior_topology",
]

"""Stage 2: lane courses of a fixed topology."""

from .estimator import estimate_lane_course, initial_course
from .mapio import load_lanelet_map, load_topology, save_lanelet_map, save_topology
from .preprocess import (
    Assignments,
    PartAssignment,
    assign_parts,
    compute_center_line,
    initialize_lanelets,
    merge_candidates,
    refine_initial,
    split_parts,
)
from .proposals import apply_move, mergeable, propose_course
from .scoring import (
    CourseScorer,
    log_likelihood_trajectory,
    log_posterior_course,
    log_prior_course,
    smoothness_delta,
)

__all__ = [
    "estimate_lane_course",
    "initial_course",
    "load_lanelet_map",
    "load_topology",
    "save_lanelet_map",
    "save_topology",
    "Assignments",
    "PartAssignment",
    "assign_parts",
    "compute_center_line",
    "initialize_lanelets",
    "merge_candidates",
    "refine_initial",
    "split_parts",
    "apply_move",
    "mergeable",
    "propose_course",
    "CourseScorer",
    "log_likelihood_trajectory",
    "log_posterior_course",
    "log_prior_course",
    "smoothness_delta",
]

"""
Stage-2 driver: lane courses for a fixed stage-1 topology.
"""

import logging
import time
from typing import Optional, Sequence

from ..config import LaneCourseConfig, TopologyConfig
from ..engine.registry import describe_moves
from ..engine.sampler import ChainResult, run_chain
from ..errors import EstimationError
from ..geometry import Point2
from ..models.lanelet import LaneletModel
from ..models.measurement import Trajectory
from ..models.topology import TopologyModel
from .preprocess import assign_parts, initialize_lanelets, merge_candidates, refine_initial, split_parts
from .proposals import KERNEL, propose_course
from .scoring import CourseScorer

logger = logging.getLogger("intersection_mcmc.lanes")


def initial_course(
    topology: TopologyModel,
    trajectories: Sequence[Trajectory],
    topo_cfg: TopologyConfig,
    lane_cfg: LaneCourseConfig,
    *,
    center: Optional[Point2] = None,
) -> LaneletModel:
    """Assigned, initialized and refined lanelet model with its merge candidates.

    Trajectories are split at `center`, or at the topology center when omitted.
    """
    parts = split_parts(trajectories, center or topology.center)
    assignments = assign_parts(topology, parts, topo_cfg)
    if assignments.rejected:
        logger.info(f"Skipping {len(assignments.rejected)} trajectories without a usable lane pair")
    model = initialize_lanelets(topology, assignments, parts, topo_cfg, lane_cfg)
    model = refine_initial(model, trajectories, lane_cfg)
    candidates = sorted(set(merge_candidates(model, lane_cfg)) | set(model.shared_pairs()))
    return model.model_copy(update={"candidates": candidates})


def estimate_lane_course(
    topology: TopologyModel,
    trajectories: Sequence[Trajectory],
    topo_cfg: TopologyConfig,
    lane_cfg: LaneCourseConfig,
    seed: int,
    *,
    center: Optional[Point2] = None,
    time_budget: Optional[float] = None,
) -> ChainResult:
    """Estimate lane courses by annealed MCMC over border points; the topology is not changed.

    Raises:
        EstimationError: If no trajectory can be assigned to a lane
    """
    if not trajectories:
        raise EstimationError("Cannot estimate lane courses without trajectories")
    started = time.perf_counter()
    model = initial_course(topology, trajectories, topo_cfg, lane_cfg, center=center)
    if not model.assignments:
        raise EstimationError("No trajectory could be assigned to a lane of the topology")
    logger.debug(f"Lane-course moves: {describe_moves(KERNEL)}")

    scorer = CourseScorer(trajectories, lane_cfg)
    result = run_chain(
        model,
        lambda state, rng: propose_course(state, lane_cfg, rng),
        scorer,
        lane_cfg.schedule.with_steps(lane_cfg.n_samples),
        seed,
        time_budget=time_budget if time_budget is not None else lane_cfg.time_budget,
    )
    best = result.best_state
    logger.info(
        f"Lane courses estimated for {len(best.assignments)} trajectories in {time.perf_counter() - started:.3f}s: "
        f"{len(best.lanelets)} lanelets, {best.shared_pair_count} shared pairs, "
        f"acceptance {result.acceptance_rate:.2%}, cache hits {scorer.hits}/{scorer.hits + scorer.misses}"
    )
    return result

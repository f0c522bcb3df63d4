"""
Stage-1 driver: runs the topology chain over detections or track summaries.
"""

import logging
import math
import time
from typing import Optional, Sequence

from ..config import TopologyConfig
from ..engine.registry import describe_moves
from ..engine.sampler import ChainResult, run_chain
from ..errors import EstimationError
from ..geometry import Point2
from ..models.measurement import DirectionClass
from ..models.topology import Arm, Lane, TopologyModel
from .proposals import KERNEL, propose_topology
from .scoring import Measurement, MeasurementBatch, log_posterior_topology

logger = logging.getLogger("intersection_mcmc.topology")


def initial_topology(center: Point2, cfg: TopologyConfig) -> TopologyModel:
    """Four perpendicular arms with one lane per direction each."""
    return TopologyModel(
        center=center,
        arms=[
            Arm(
                heading=k * math.pi / 2.0,
                gap=0.0,
                lanes_in=[Lane(direction=DirectionClass.ENTERING, width=cfg.lane_width_default)],
                lanes_out=[Lane(direction=DirectionClass.LEAVING, width=cfg.lane_width_default)],
            )
            for k in range(4)
        ],
    )


def initial_center(batch: MeasurementBatch, cfg: TopologyConfig) -> Point2:
    """Heading crossing of the measurements, or their centroid when headings cannot locate one."""
    if cfg.initial_center == "heading_lines":
        crossing = batch.heading_crossing()
        if crossing is not None:
            return Point2.from_array(crossing)
        logger.debug("Headings do not cross; starting from the measurement centroid")
    return Point2.from_array(batch.centroid())


def _run(
    initial: TopologyModel,
    measurements: Sequence[Measurement],
    cfg: TopologyConfig,
    seed: int,
    time_budget: Optional[float],
) -> ChainResult:
    batch = MeasurementBatch.from_measurements(measurements)
    logger.debug(f"Topology moves: {describe_moves(KERNEL)}")
    started = time.perf_counter()
    result = run_chain(
        initial,
        lambda model, rng: propose_topology(model, cfg, rng),
        lambda model: log_posterior_topology(model, batch, cfg),
        cfg.schedule.with_steps(cfg.n_samples),
        seed,
        time_budget=time_budget if time_budget is not None else cfg.time_budget,
    )
    best = result.best_state
    logger.info(
        f"Topology estimated from {len(batch)} measurements in {time.perf_counter() - started:.3f}s: "
        f"{len(best.arms)} arms, {best.lane_count} lanes, {result.proposed_count} samples, "
        f"acceptance {result.acceptance_rate:.2%}, log posterior {result.best_log_posterior:.2f}"
    )
    return result


def estimate_topology(
    measurements: Sequence[Measurement],
    cfg: TopologyConfig,
    seed: int,
    *,
    time_budget: Optional[float] = None,
) -> ChainResult:
    """Estimate the lane-level topology from detections or track summaries.

    The chain starts from a four-arm model at initial_center().

    Raises:
        EstimationError: If there are no measurements
    """
    if not measurements:
        raise EstimationError("Cannot estimate a topology without measurements")
    center = initial_center(MeasurementBatch.from_measurements(measurements), cfg)
    return _run(initial_topology(center, cfg), measurements, cfg, seed, time_budget)


def update_topology(
    previous: TopologyModel,
    measurements: Sequence[Measurement],
    cfg: TopologyConfig,
    seed: int,
    *,
    time_budget: Optional[float] = None,
) -> ChainResult:
    """Refine an earlier estimate with the current measurement set (warm start)."""
    if not measurements:
        raise EstimationError("Cannot update a topology without measurements")
    return _run(previous, measurements, cfg, seed, time_budget)

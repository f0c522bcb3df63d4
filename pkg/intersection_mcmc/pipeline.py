"""
Two-stage estimation of one intersection from a dataset.
"""

import logging
import time
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict

from .config import RunConfig
from .engine.sampler import ChainResult
from .errors import EstimationError
from .geometry import Point2
from .ingest import prepare_detections, split_center, summarize_trajectories, write_document
from .lanes import estimate_lane_course, save_lanelet_map, save_topology
from .models.lanelet import LaneletModel
from .models.measurement import Dataset
from .models.topology import TopologyModel
from .topology import estimate_topology
from .topology.scoring import Measurement

logger = logging.getLogger("intersection_mcmc.pipeline")


class IntersectionEstimate(BaseModel):
    """Results and wall-clock of both stages for one dataset."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    seed: int
    topology: ChainResult
    lane_course: Optional[ChainResult] = None
    stage1_seconds: float
    stage2_seconds: float = 0.0
    measurement_count: int

    @property
    def topology_model(self) -> TopologyModel:
        return self.topology.best_state

    @property
    def lanelet_model(self) -> Optional[LaneletModel]:
        return self.lane_course.best_state if self.lane_course is not None else None


def measurements_for(dataset: Dataset, cfg: RunConfig) -> List[Measurement]:
    """Track summaries (tracked input) or prepared raw detections (detection input)."""
    if cfg.input_mode == "detections":
        center = Point2(x=cfg.seed_center[0], y=cfg.seed_center[1]) if cfg.seed_center is not None else dataset.center
        return prepare_detections(dataset.detections, cfg.ingest, center)
    if not dataset.trajectories:
        raise EstimationError(f"Dataset {dataset.name} has no trajectories for tracked input")
    return summarize_trajectories(dataset.trajectories, split_center(dataset, cfg.seed_center))


def estimate_intersection(dataset: Dataset, cfg: RunConfig, seed: Optional[int] = None) -> IntersectionEstimate:
    """Stage 1 on the configured input, then stage 2 when trajectories are present.

    Raises:
        EstimationError: If there is nothing to estimate from
    """
    seed = cfg.seed if seed is None else seed
    measurements = measurements_for(dataset, cfg)
    logger.info(f"Estimating {dataset.name} from {len(measurements)} {cfg.input_mode} measurements (seed {seed})")

    started = time.perf_counter()
    topology = estimate_topology(measurements, cfg.topology, seed, time_budget=cfg.topology.time_budget)
    stage1_seconds = time.perf_counter() - started

    lane_course, stage2_seconds = None, 0.0
    if dataset.trajectories:
        started = time.perf_counter()
        lane_course = estimate_lane_course(
            topology.best_state,
            dataset.trajectories,
            cfg.topology,
            cfg.lane_course,
            seed,
            center=split_center(dataset, cfg.seed_center),
            time_budget=cfg.lane_course.time_budget,
        )
        stage2_seconds = time.perf_counter() - started

    return IntersectionEstimate(
        name=dataset.name,
        seed=seed,
        topology=topology,
        lane_course=lane_course,
        stage1_seconds=stage1_seconds,
        stage2_seconds=stage2_seconds,
        measurement_count=len(measurements),
    )


def write_estimate(estimate: IntersectionEstimate, cfg: RunConfig, out_dir: Path) -> Dict[str, Path]:
    """Write topology, lanelet map and timing documents, each with the seed and resolved config."""
    out_dir = Path(out_dir)
    envelope = {"seed": estimate.seed, "config": cfg.resolved()}
    written = {
        "topology": save_topology(
            estimate.topology_model,
            out_dir / f"{estimate.name}.topology.json",
            log_posterior=estimate.topology.best_log_posterior,
            **envelope,
        )
    }
    if estimate.lanelet_model is not None:
        written["lanelets"] = save_lanelet_map(
            estimate.lanelet_model,
            out_dir / f"{estimate.name}.lanelets.json",
            log_posterior=estimate.lane_course.best_log_posterior,
            **envelope,
        )
    timing = {
        **envelope,
        "name": estimate.name,
        "input_mode": cfg.input_mode,
        "measurements": estimate.measurement_count,
        "stage1": {
            "samples": cfg.topology.n_samples,
            "proposed": estimate.topology.proposed_count,
            "seconds": estimate.stage1_seconds,
            "acceptance_rate": estimate.topology.acceptance_rate,
        },
    }
    if estimate.lane_course is not None:
        timing["stage2"] = {
            "samples": cfg.lane_course.n_samples,
            "proposed": estimate.lane_course.proposed_count,
            "seconds": estimate.stage2_seconds,
            "acceptance_rate": estimate.lane_course.acceptance_rate,
        }
    written["timing"] = write_document(timing, out_dir / f"{estimate.name}.timing.json")
    for kind, path in written.items():
        logger.info(f"Wrote {kind} to {path}")
    return written

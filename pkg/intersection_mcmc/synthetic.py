"""
Synthetic intersections, trajectories and detections.

Ground truth uses the estimator's own lane geometry (straight lanes from the
arm mouths) joined by cubic Hermite connections tangent to both lanes.
Simulated routes follow the ground-truth center lines; noise and clutter
are added afterwards.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.interpolate import CubicHermiteSpline

from .config import GenerationParams, LaneCourseConfig, TopologyConfig
from .errors import GenerationError
from .geometry import Point2, resample_array
from .ingest import load_document, write_document
from .lanes.mapio import LaneletRecord, lanelet_records, model_from_records
from .lanes.preprocess import compute_center_line, connection_lanelet, lane_lanelets, mouth_point
from .models.lanelet import LaneletModel
from .models.measurement import Dataset, Detection, DirectionClass, Trajectory
from .models.topology import Arm, Lane, TopologyModel
from .topology.rays import travel_direction

logger = logging.getLogger("intersection_mcmc.synthetic")

BIG_LANE_COUNT = 16
CURVE_SAMPLES = 64


class GroundTruthConnection(BaseModel):
    """A drivable (entering, leaving) lane pair and the lanelet joining them."""
    entering: str
    leaving: str
    lanelet: str


class GroundTruth(BaseModel):
    """A ground-truth intersection: topology, lanelets and their connections."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = "intersection"
    category: str = Field("small", description="'small' or 'big'")
    topology: TopologyModel
    lanelets: LaneletModel
    connections: List[GroundTruthConnection] = Field(default_factory=list)

    def center_line(self, lanelet_id: str) -> np.ndarray:
        return self.lanelets.center_lines[lanelet_id].points


class GroundTruthDocument(BaseModel):
    name: str = "intersection"
    category: str = "small"
    seed: Optional[int] = None
    config: Optional[Dict[str, Any]] = None
    topology: TopologyModel
    connections: List[GroundTruthConnection] = Field(default_factory=list)
    lanelets: List[LaneletRecord] = Field(default_factory=list)


def _draw(rng: np.random.Generator, values: List[int]) -> int:
    return int(values[int(rng.integers(len(values)))])


def _headings(n: int, params: GenerationParams, rng: np.random.Generator) -> np.ndarray:
    for _ in range(params.max_retries):
        headings = np.sort(rng.uniform(0.0, 2.0 * math.pi, size=n))
        separations = np.diff(np.append(headings, headings[0] + 2.0 * math.pi))
        if np.all(separations >= params.min_angle):
            return headings
    raise GenerationError(f"No {n}-arm layout with separations ≥ {math.degrees(params.min_angle):.1f}° "
                          f"after {params.max_retries} attempts")


def connection_curve(start: np.ndarray, start_dir: np.ndarray, end: np.ndarray, end_dir: np.ndarray, spacing: float) -> np.ndarray:
    """Cubic Hermite curve from `start` to `end`, tangent to both driving directions."""
    scale = float(np.linalg.norm(end - start))
    spline = CubicHermiteSpline([0.0, 1.0], np.vstack([start, end]), np.vstack([start_dir, end_dir]) * scale)
    return resample_array(spline(np.linspace(0.0, 1.0, CURVE_SAMPLES)), spacing)


def generate_intersection(
    params: GenerationParams,
    rng: np.random.Generator,
    topo_cfg: Optional[TopologyConfig] = None,
    spacing: Optional[float] = None,
    name: str = "intersection",
) -> GroundTruth:
    """Random intersection within the generation ranges.

    Raises:
        GenerationError: If no heading layout is found within max_retries
    """
    topo_cfg = topo_cfg or TopologyConfig()
    spacing = spacing or LaneCourseConfig().support_spacing
    headings = _headings(_draw(rng, params.arm_counts), params, rng)
    arms = []
    for heading in headings:
        lanes_in = _draw(rng, params.lanes_per_direction)
        lanes_out = _draw(rng, params.lanes_per_direction)
        arms.append(Arm(
            heading=float(heading),
            gap=float(rng.uniform(0.0, params.max_gap)),
            lanes_in=[Lane(direction=DirectionClass.ENTERING, width=params.lane_width, offset_index=k) for k in range(lanes_in)],
            lanes_out=[Lane(direction=DirectionClass.LEAVING, width=params.lane_width, offset_index=k) for k in range(lanes_out)],
        ))
    topology = TopologyModel(center=Point2(x=0.0, y=0.0), arms=arms)

    lengths = {i: params.arm_length for i in range(len(topology.arms))}
    lanelets, shares = lane_lanelets(topology, topo_cfg, lengths, spacing)
    lanes = list(lanelets.values())
    connections = []
    for entering in lanes:
        if entering.direction != DirectionClass.ENTERING:
            continue
        for leaving in lanes:
            if leaving.direction != DirectionClass.LEAVING or leaving.arm_index == entering.arm_index:
                continue
            center = connection_curve(
                mouth_point(entering, at_end=True),
                travel_direction(topology.arms[entering.arm_index].heading, DirectionClass.ENTERING),
                mouth_point(leaving, at_end=False),
                travel_direction(topology.arms[leaving.arm_index].heading, DirectionClass.LEAVING),
                spacing,
            )
            lanelet = connection_lanelet(entering, leaving, center, params.lane_width)
            lanelets[lanelet.id] = lanelet
            connections.append(GroundTruthConnection(entering=entering.id, leaving=leaving.id, lanelet=lanelet.id))

    model = LaneletModel(
        lanelets=lanelets,
        center_lines={lid: compute_center_line(l) for lid, l in lanelets.items()},
        shares=shares,
    )
    category = "big" if topology.lane_count >= BIG_LANE_COUNT else "small"
    logger.debug(f"Generated {name}: {len(arms)} arms, {topology.lane_count} lanes, {len(connections)} connections")
    return GroundTruth(name=name, category=category, topology=topology, lanelets=model, connections=connections)


def route_line(gt: GroundTruth, connection: GroundTruthConnection) -> np.ndarray:
    """Center line of a full route: entering lane, connection, leaving lane."""
    pieces = [gt.center_line(connection.entering), gt.center_line(connection.lanelet), gt.center_line(connection.leaving)]
    line = np.vstack(pieces)
    keep = np.concatenate([[True], np.linalg.norm(np.diff(line, axis=0), axis=1) > 1e-9])
    return line[keep]


def _route_trajectory(trajectory_id: str, line: np.ndarray, center: np.ndarray, step: float, speed: float) -> Trajectory:
    points = resample_array(line, step)
    closest = int(np.argmin(np.linalg.norm(points - center, axis=1)))
    detections = []
    for i, (x, y) in enumerate(points.tolist()):
        entering = i <= closest
        detections.append(Detection(
            x=x, y=y,
            timestamp=i * step / speed,
            direction_class=DirectionClass.ENTERING if entering else DirectionClass.LEAVING,
            doppler=-speed if entering else speed,
        ))
    return Trajectory(id=trajectory_id, points=detections)


def simulate_trajectories(
    gt: GroundTruth,
    rng: np.random.Generator,
    max_per_lane: int = 6,
    step: float = 2.0,
    speed: float = 10.0,
) -> List[Trajectory]:
    """Between 1 and max_per_lane routes per entering lane, each to a random reachable leaving lane.

    Routes prefer leaving lanes nobody has driven yet; a leaving lane still
    unused afterwards gets one extra route from the least used entering lane
    that reaches it, so every ground-truth lane carries traffic.
    """
    by_entering: Dict[str, List[GroundTruthConnection]] = {}
    for connection in gt.connections:
        by_entering.setdefault(connection.entering, []).append(connection)
    unused = {connection.leaving for connection in gt.connections}
    routes: Dict[str, int] = {lanelet_id: 0 for lanelet_id in by_entering}
    chosen: List[GroundTruthConnection] = []

    def take(connection: GroundTruthConnection) -> None:
        chosen.append(connection)
        unused.discard(connection.leaving)
        routes[connection.entering] += 1

    for lanelet_id in sorted(by_entering):
        reachable = by_entering[lanelet_id]
        for _ in range(int(rng.integers(1, max_per_lane + 1))):
            fresh = [c for c in reachable if c.leaving in unused]
            pool = fresh or reachable
            take(pool[int(rng.integers(len(pool)))])
    for leaving in sorted(unused):
        feeding = sorted((c for c in gt.connections if c.leaving == leaving), key=lambda c: (routes[c.entering], c.entering))
        take(feeding[0])

    center = gt.topology.center.as_array()
    return [
        _route_trajectory(str(i), route_line(gt, connection), center, step, speed)
        for i, connection in enumerate(chosen)
    ]


def add_noise(trajectories: List[Trajectory], sigma: float, rng: np.random.Generator) -> List[Trajectory]:
    """Isotropic Gaussian displacement of every point; ids and timestamps are kept."""
    if sigma < 0.0:
        raise ValueError("noise sigma must be non-negative")
    if sigma == 0.0:
        return list(trajectories)
    noisy = []
    for trajectory in trajectories:
        offsets = rng.normal(0.0, sigma, size=(len(trajectory.points), 2))
        points = [p.model_copy(update={"x": p.x + dx, "y": p.y + dy}) for p, (dx, dy) in zip(trajectory.points, offsets.tolist())]
        noisy.append(trajectory.model_copy(update={"points": points}))
    return noisy


def add_clutter(
    detections: List[Detection],
    center: Point2,
    count: int,
    rng: np.random.Generator,
    radius: float = 80.0,
    speed: float = 10.0,
) -> List[Detection]:
    """Append `count` false detections at U(0, radius) around the center with random direction class."""
    if count < 0:
        raise ValueError("clutter count must be non-negative")
    clutter = []
    for _ in range(count):
        r = rng.uniform(0.0, radius)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        entering = rng.random() < 0.5
        clutter.append(Detection(
            x=center.x + r * math.cos(phi),
            y=center.y + r * math.sin(phi),
            direction_class=DirectionClass.ENTERING if entering else DirectionClass.LEAVING,
            doppler=-speed if entering else speed,
        ))
    return list(detections) + clutter


def build_dataset(
    gt: GroundTruth,
    params: GenerationParams,
    rng: np.random.Generator,
    seed: Optional[int] = None,
    config: Optional[Dict[str, Any]] = None,
) -> Dataset:
    """Noisy trajectories plus raw detections (all trajectory points and clutter) for one intersection."""
    trajectories = simulate_trajectories(gt, rng, params.max_per_lane, params.step, params.speed)
    noisy = add_noise(trajectories, params.noise_sigma, rng)
    raw = [Detection(x=p.x, y=p.y, direction_class=p.direction_class, doppler=p.doppler) for t in noisy for p in t.points]
    detections = add_clutter(raw, gt.topology.center, params.clutter_count, rng, params.clutter_radius, params.speed)
    return Dataset(
        name=gt.name,
        detections=detections,
        trajectories=noisy,
        center=gt.topology.center,
        seed=seed,
        config=config,
    )


def generate_suite(
    params: GenerationParams,
    topo_cfg: Optional[TopologyConfig] = None,
    config: Optional[Dict[str, Any]] = None,
) -> List[Tuple[GroundTruth, Dataset, int]]:
    """`params.count` intersections, each from its own seed derived from params.seed."""
    seeds = np.random.default_rng(params.seed).integers(0, 2**31 - 1, size=params.count)
    width = len(str(params.count - 1))
    suite = []
    for index, seed in enumerate(int(s) for s in seeds):
        rng = np.random.default_rng(seed)
        name = f"intersection-{index:0{width}d}"
        gt = generate_intersection(params, rng, topo_cfg, name=name)
        suite.append((gt, build_dataset(gt, params, rng, seed=seed, config=config), seed))
    return suite


def ground_truth_document(gt: GroundTruth, seed: Optional[int] = None, config: Optional[Dict[str, Any]] = None) -> dict:
    document = GroundTruthDocument(
        name=gt.name,
        category=gt.category,
        seed=seed,
        config=config,
        topology=gt.topology,
        connections=gt.connections,
        lanelets=lanelet_records(gt.lanelets),
    )
    return document.model_dump(mode="json", exclude_none=True)


def save_ground_truth(gt: GroundTruth, path: Path, seed: Optional[int] = None, config: Optional[Dict[str, Any]] = None) -> Path:
    return write_document(ground_truth_document(gt, seed, config), path)


def load_ground_truth(path: Path) -> GroundTruth:
    """Read a ground-truth document (synthetic or hand-labelled).

    Raises:
        DatasetParseError: If the document is malformed
    """
    document = load_document(path, GroundTruthDocument)
    return GroundTruth(
        name=document.name,
        category=document.category,
        topology=document.topology,
        lanelets=model_from_records(document.lanelets),
        connections=document.connections,
    )

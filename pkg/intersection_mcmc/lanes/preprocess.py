"""
Lane-course initialization from a stage-1 topology and trajectories.

Trajectory parts are assigned to the nearest direction-compatible lane ray,
every lane becomes a lanelet, each observed lane pair gets a straight
connecting lanelet, and the center lines are pulled onto the trajectories.
"""

import itertools
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from sklearn.neighbors import NearestNeighbors

from ..config import LaneCourseConfig, TopologyConfig
from ..errors import EstimationError
from ..geometry import Point2, project_onto, resample_array, vertex_normals
from ..ingest import reduce_track, split_trajectory
from ..models.lanelet import CenterLine, Lanelet, LaneletModel, PointRef
from ..models.measurement import DirectionClass, TrackSummary, Trajectory
from ..models.topology import TopologyModel
from ..topology.rays import axis, lane_table, mouth_distance

logger = logging.getLogger("intersection_mcmc.lanes")

_REVISIONS = itertools.count(1)

LaneKey = Tuple[int, DirectionClass, int]


def next_revision() -> int:
    return next(_REVISIONS)


def lanelet_id(key: LaneKey) -> str:
    arm_index, direction, k = key
    return f"a{arm_index}-{'in' if direction == DirectionClass.ENTERING else 'out'}{k}"


class PartAssignment(BaseModel):
    """One trajectory part and the lane it was assigned to."""
    trajectory_id: str
    role: str = Field(..., description="'incoming' or 'outgoing'")
    arm_index: int
    direction: DirectionClass
    lane_index: int
    distance: float

    @property
    def key(self) -> LaneKey:
        return (self.arm_index, self.direction, self.lane_index)


class Assignments(BaseModel):
    """Part-to-lane assignments and the lane pairs trajectories connect."""
    parts: List[PartAssignment] = Field(default_factory=list)
    connections: Dict[str, Tuple[LaneKey, LaneKey]] = Field(default_factory=dict)
    singles: Dict[str, LaneKey] = Field(default_factory=dict, description="Trajectories with one usable part")
    rejected: List[str] = Field(default_factory=list, description="U-turns and partially assigned trajectories")


def split_parts(trajectories: Iterable[Trajectory], center: Point2) -> List[Trajectory]:
    """Both halves of every trajectory cut at its point closest to the center."""
    parts = []
    for trajectory in trajectories:
        parts.extend(part for part in split_trajectory(trajectory, center) if len(part.points) >= 2)
    return parts


def _classified(parts: Iterable[Trajectory], center: Point2) -> Iterable[Tuple[str, Trajectory, TrackSummary]]:
    for part in parts:
        if len(part.points) < 2:
            continue
        try:
            summary = reduce_track(part, center)
        except ValueError as e:
            logger.debug(f"Skipping part of {part.id}: {e}")
            continue
        role = "incoming" if summary.direction_class == DirectionClass.ENTERING else "outgoing"
        yield role, part, summary


def assign_parts(topology: TopologyModel, parts: Sequence[Trajectory], cfg: TopologyConfig) -> Assignments:
    """Assign each part to the lane ray closest to its mean point.

    Only lanes of the part's own driving direction compete; ties go to the lane
    listed first. Incoming and outgoing parts of one trajectory on different
    arms define a connection; U-turns (same arm) are rejected.
    """
    table = lane_table(topology, cfg)
    assignments = Assignments()
    by_trajectory: Dict[str, Dict[str, PartAssignment]] = {}
    usable: Dict[str, int] = {}
    for role, part, summary in _classified(parts, topology.center):
        usable[part.id] = usable.get(part.id, 0) + 1
        if not table.refs:
            break
        code = 0 if role == "incoming" else 1
        p = summary.mean_position.as_array()
        ab = table.ends - table.starts
        t = np.clip(np.einsum("lj,lj->l", p - table.starts, ab) / np.einsum("lj,lj->l", ab, ab), 0.0, 1.0)
        dist = np.linalg.norm(p - (table.starts + t[:, None] * ab), axis=1)
        dist = np.where(table.codes == code, dist, np.inf)
        best = int(np.argmin(dist))
        if not np.isfinite(dist[best]):
            continue
        arm_index, direction, k = table.refs[best]
        assignment = PartAssignment(
            trajectory_id=part.id,
            role=role,
            arm_index=arm_index,
            direction=direction,
            lane_index=k,
            distance=float(dist[best]),
        )
        assignments.parts.append(assignment)
        by_trajectory.setdefault(part.id, {})[role] = assignment

    for trajectory_id, roles in by_trajectory.items():
        incoming, outgoing = roles.get("incoming"), roles.get("outgoing")
        if incoming is None or outgoing is None:
            if usable[trajectory_id] == 1:
                assignments.singles[trajectory_id] = (incoming or outgoing).key
            else:
                assignments.rejected.append(trajectory_id)
        elif incoming.arm_index == outgoing.arm_index:
            logger.debug(f"Rejecting U-turn of trajectory {trajectory_id} on arm {incoming.arm_index}")
            assignments.rejected.append(trajectory_id)
        else:
            assignments.connections[trajectory_id] = (incoming.key, outgoing.key)
    return assignments


def compute_center_line(lanelet: Lanelet) -> CenterLine:
    """Midpoints of opposing border points with one extra midpoint between each pair."""
    mids = (lanelet.left + lanelet.right) / 2.0
    doubled = np.empty((2 * len(mids) - 1, 2))
    doubled[0::2] = mids
    doubled[1::2] = (mids[:-1] + mids[1:]) / 2.0
    return CenterLine(points=doubled)


def _borders(center: np.ndarray, width: float) -> Tuple[np.ndarray, np.ndarray]:
    normals = vertex_normals(center)
    return center + normals * width / 2.0, center - normals * width / 2.0


def _arm_lengths(
    topology: TopologyModel,
    assignments: Assignments,
    parts: Dict[Tuple[str, str], Trajectory],
    topo_cfg: TopologyConfig,
    lane_cfg: LaneCourseConfig,
) -> Dict[int, float]:
    extents: Dict[int, List[float]] = {}
    for a in assignments.parts:
        arm = topology.arms[a.arm_index]
        origin = topology.center.as_array() + mouth_distance(topology, a.arm_index, topo_cfg) * axis(arm.heading)
        along = (parts[(a.trajectory_id, a.role)].xy() - origin) @ axis(arm.heading)
        extents.setdefault(a.arm_index, []).extend(along.tolist())
    lengths = {}
    for i in range(len(topology.arms)):
        values = extents.get(i)
        length = float(np.quantile(values, lane_cfg.lane_extent_quantile)) if values else lane_cfg.min_lane_length
        length = np.floor(length / lane_cfg.support_spacing) * lane_cfg.support_spacing
        lengths[i] = max(lane_cfg.min_lane_length, float(length))
    return lengths


def _share_if_coincident(shares: Dict[PointRef, PointRef], model: Dict[str, Lanelet], a: PointRef, b: PointRef) -> None:
    if a in shares or b in shares:
        return
    if np.linalg.norm(model[a.lanelet].border(a.side)[a.index] - model[b.lanelet].border(b.side)[b.index]) < 1e-6:
        shares[a] = b
        shares[b] = a


def lane_lanelets(
    topology: TopologyModel,
    topo_cfg: TopologyConfig,
    lengths: Dict[int, float],
    spacing: float,
) -> Tuple[Dict[str, Lanelet], Dict[PointRef, PointRef]]:
    """Straight lanelets along every lane ray, `lengths[arm]` long from the mouth.

    Neighbouring lanes of an arm share their common border points; so do the
    innermost opposite lanes of an arm without a gap.
    """
    table = lane_table(topology, topo_cfg)
    lanelets: Dict[str, Lanelet] = {}
    for row, (arm_index, direction, k) in enumerate(table.refs):
        arm = topology.arms[arm_index]
        stations = np.arange(0.0, lengths[arm_index] + 1e-9, spacing)
        center = table.starts[row][None, :] + stations[:, None] * axis(arm.heading)[None, :]
        if direction == DirectionClass.ENTERING:
            center = center[::-1]
        left, right = _borders(center, arm.lanes(direction)[k].width)
        lid = lanelet_id((arm_index, direction, k))
        lanelets[lid] = Lanelet(
            id=lid, kind="lane", left=left, right=right,
            arm_index=arm_index, direction=direction, lane_index=k,
            revision=next_revision(),
        )

    shares: Dict[PointRef, PointRef] = {}
    for arm_index, arm in enumerate(topology.arms):
        for direction in (DirectionClass.ENTERING, DirectionClass.LEAVING):
            for k in range(len(arm.lanes(direction)) - 1):
                inner, outer = lanelet_id((arm_index, direction, k)), lanelet_id((arm_index, direction, k + 1))
                for j in range(len(lanelets[inner])):
                    _share_if_coincident(shares, lanelets, PointRef(inner, "right", j), PointRef(outer, "left", j))
        if arm.lanes_in and arm.lanes_out and arm.gap < 1e-6:
            entering = lanelet_id((arm_index, DirectionClass.ENTERING, 0))
            leaving = lanelet_id((arm_index, DirectionClass.LEAVING, 0))
            n = len(lanelets[entering])
            for j in range(n):
                _share_if_coincident(shares, lanelets, PointRef(entering, "left", j), PointRef(leaving, "left", n - 1 - j))
    return lanelets, shares


def connection_id(entering_id: str, leaving_id: str) -> str:
    return f"c:{entering_id}->{leaving_id}"


def connection_lanelet(entering: Lanelet, leaving: Lanelet, center: np.ndarray, width: float) -> Lanelet:
    """Lanelet through the intersection along `center`, from one lane mouth to another."""
    left, right = _borders(center, width)
    return Lanelet(
        id=connection_id(entering.id, leaving.id), kind="connection", left=left, right=right,
        connects=(entering.id, leaving.id), revision=next_revision(),
    )


def mouth_point(lanelet: Lanelet, at_end: bool) -> np.ndarray:
    i = -1 if at_end else 0
    return (lanelet.left[i] + lanelet.right[i]) / 2.0


def initialize_lanelets(
    topology: TopologyModel,
    assignments: Assignments,
    parts: Iterable[Trajectory],
    topo_cfg: TopologyConfig,
    lane_cfg: LaneCourseConfig,
) -> LaneletModel:
    """Build one lanelet per topology lane plus straight connecting lanelets.

    Lanes extend over the bulk of the data assigned to their arm; connections
    are straight chords between the joined mouths.

    Raises:
        EstimationError: If a connection references a lane the topology lacks
    """
    part_index = {(part.id, role): part for role, part, _ in _classified(parts, topology.center)}
    lengths = _arm_lengths(topology, assignments, part_index, topo_cfg, lane_cfg)
    known = set(topology.lane_refs())
    lanelets, shares = lane_lanelets(topology, topo_cfg, lengths, lane_cfg.support_spacing)

    paths: Dict[str, List[str]] = {}
    for trajectory_id, key in assignments.singles.items():
        if key not in known:
            raise EstimationError(f"Trajectory {trajectory_id} is assigned to a lane missing from the topology")
        paths[trajectory_id] = [lanelet_id(key)]
    for trajectory_id, (in_key, out_key) in assignments.connections.items():
        if in_key not in known or out_key not in known:
            raise EstimationError(f"Trajectory {trajectory_id} connects lanes missing from the topology")
        in_id, out_id = lanelet_id(in_key), lanelet_id(out_key)
        cid = connection_id(in_id, out_id)
        if cid not in lanelets:
            start, end = mouth_point(lanelets[in_id], at_end=True), mouth_point(lanelets[out_id], at_end=False)
            if np.linalg.norm(end - start) < 1e-6:
                paths[trajectory_id] = [in_id, out_id]
                continue
            width = (
                topology.arms[in_key[0]].lanes(in_key[1])[in_key[2]].width
                + topology.arms[out_key[0]].lanes(out_key[1])[out_key[2]].width
            ) / 2.0
            center = resample_array(np.vstack([start, end]), lane_cfg.support_spacing)
            lanelets[cid] = connection_lanelet(lanelets[in_id], lanelets[out_id], center, width)
        paths[trajectory_id] = [in_id, cid, out_id]

    model = LaneletModel(
        lanelets=lanelets,
        center_lines={lid: compute_center_line(l) for lid, l in lanelets.items()},
        assignments=paths,
        shares=shares,
    )
    logger.info(
        f"Initialized {len(lanelets)} lanelets "
        f"({sum(l.kind == 'connection' for l in lanelets.values())} connections, {model.shared_pair_count} shared pairs)"
    )
    return model


def _trajectory_points(model: LaneletModel, trajectories: Iterable[Trajectory]) -> Dict[str, List[np.ndarray]]:
    """Per lanelet, the point arrays of the trajectories whose path contains it."""
    by_lanelet: Dict[str, List[np.ndarray]] = {}
    for trajectory in trajectories:
        for lid in model.assignments.get(trajectory.id, []):
            by_lanelet.setdefault(lid, []).append(trajectory.xy())
    return by_lanelet


def refine_initial(
    model: LaneletModel,
    trajectories: Iterable[Trajectory],
    cfg: LaneCourseConfig,
    max_lateral: Optional[float] = None,
) -> LaneletModel:
    """Move each border pair along its normal onto the assigned trajectory data.

    A pair moves by the mean signed lateral offset of the trajectory points
    projecting within ±support_spacing of it; width is preserved. Pairs with no
    data nearby stay put. Shared points settle at the midpoint of their copies.
    """
    by_lanelet = _trajectory_points(model, trajectories)
    cap = max_lateral if max_lateral is not None else 3.0 * cfg.sigma_perp
    lanelets = dict(model.lanelets)
    for lid, lanelet in model.lanelets.items():
        chunks = by_lanelet.get(lid)
        if not chunks:
            continue
        points = np.vstack(chunks)
        mids = (lanelet.left + lanelet.right) / 2.0
        along, lateral, clamped = project_onto(points, mids)
        width = np.linalg.norm(lanelet.left - lanelet.right, axis=1)
        stations = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(mids, axis=0), axis=1))])
        normals = vertex_normals(mids)
        left, right = lanelet.left.copy(), lanelet.right.copy()
        usable = ~clamped
        moved = False
        for i, station in enumerate(stations):
            window = usable & (np.abs(along - station) <= cfg.support_spacing) & (np.abs(lateral) <= cap + width[i] / 2.0)
            if not window.any():
                continue
            shift = float(lateral[window].mean())
            left[i] += shift * normals[i]
            right[i] += shift * normals[i]
            moved = moved or shift != 0.0
        if moved:
            lanelets[lid] = lanelet.model_copy(update={"left": left, "right": right, "revision": next_revision()})

    for a, b in model.shared_pairs():
        midpoint = (lanelets[a.lanelet].border(a.side)[a.index] + lanelets[b.lanelet].border(b.side)[b.index]) / 2.0
        for ref in (a, b):
            current = lanelets[ref.lanelet].border(ref.side)[ref.index]
            if np.any(current != midpoint):
                lanelet = lanelets[ref.lanelet]
                border = lanelet.border(ref.side).copy()
                border[ref.index] = midpoint
                lanelets[ref.lanelet] = lanelet.model_copy(update={ref.side: border, "revision": next_revision()})

    center_lines = {
        lid: (model.center_lines[lid] if lanelets[lid] is model.lanelets[lid] else compute_center_line(lanelets[lid]))
        for lid in lanelets
    }
    return model.model_copy(update={"lanelets": lanelets, "center_lines": center_lines})


def adjacent_lanelets(model: LaneletModel) -> List[Tuple[str, str]]:
    """Lanelet pairs whose borders may be fused: lanes of one arm, connections and their lanes."""
    pairs = set()
    lanes = [l for l in model.lanelets.values() if l.kind == "lane"]
    for a, b in itertools.combinations(lanes, 2):
        if a.arm_index == b.arm_index:
            pairs.add(tuple(sorted((a.id, b.id))))
    for lanelet in model.lanelets.values():
        if lanelet.kind == "connection" and lanelet.connects:
            for other in lanelet.connects:
                if other in model.lanelets:
                    pairs.add(tuple(sorted((lanelet.id, other))))
    return sorted(pairs)


def _border_refs(lanelet: Lanelet) -> Tuple[List[PointRef], np.ndarray]:
    refs = [PointRef(lanelet.id, side, i) for side in ("left", "right") for i in range(len(lanelet))]
    return refs, np.vstack([lanelet.left, lanelet.right])


def merge_candidates(model: LaneletModel, cfg: LaneCourseConfig) -> List[Tuple[PointRef, PointRef]]:
    """Unshared border-point pairs of adjacent lanelets within merge_radius."""
    candidates = set()
    for a_id, b_id in adjacent_lanelets(model):
        a_refs, a_xy = _border_refs(model.lanelets[a_id])
        b_refs, b_xy = _border_refs(model.lanelets[b_id])
        index = NearestNeighbors(radius=cfg.merge_radius).fit(b_xy)
        neighbours = index.radius_neighbors(a_xy, return_distance=False)
        for i, found in enumerate(neighbours):
            for j in found:
                a, b = a_refs[i], b_refs[int(j)]
                if a in model.shares or b in model.shares:
                    continue
                candidates.add((a, b) if a < b else (b, a))
    return sorted(candidates)

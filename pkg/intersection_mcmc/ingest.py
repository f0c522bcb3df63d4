"""
Measurement preprocessing and dataset file I/O.

Raw detections are filtered by Doppler magnitude, classified by Doppler sign
and voxelized. Trajectories are split at the point closest to the intersection
center and each part is reduced to a single weighted track summary.
"""

import json
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError

from .config import IngestConfig
from .errors import DatasetParseError, IntersectionMcmcError
from .geometry import Direction2, Point2, circular_mean
from .models.measurement import Dataset, Detection, DirectionClass, TrackSummary, Trajectory

logger = logging.getLogger("intersection_mcmc.ingest")

DocumentT = TypeVar("DocumentT", bound=BaseModel)


def classify_doppler(v_doppler: float) -> DirectionClass:
    """Positive radial velocity leaves the intersection, anything else enters."""
    return DirectionClass.LEAVING if v_doppler > 0.0 else DirectionClass.ENTERING


def filter_static(detections: Iterable[Detection], threshold: float) -> List[Detection]:
    """Drop detections whose Doppler magnitude marks them as static clutter.

    Detections without a Doppler value pass unchanged.
    """
    return [d for d in detections if d.doppler is None or abs(d.doppler) >= threshold]


def classify_detections(detections: Iterable[Detection]) -> List[Detection]:
    """Give Doppler-only detections a direction class."""
    classified = []
    for d in detections:
        if d.direction_class is None and d.heading is None:
            d = d.model_copy(update={"direction_class": classify_doppler(d.doppler)})
        classified.append(d)
    return classified


HEADING_SECTORS = 4


def _heading_label(d: Detection, cell_center: np.ndarray, center: np.ndarray) -> str:
    """Direction class and quarter-turn sector of an oriented detection.

    The class compares the heading with the direction to the center, as the
    topology likelihood does; the sector keeps opposing flows apart.
    """
    h = d.heading.as_array()
    entering = float(h @ (center - cell_center)) > 0.0
    sector = int(d.heading.angle // (2.0 * math.pi / HEADING_SECTORS)) % HEADING_SECTORS
    kind = DirectionClass.ENTERING if entering else DirectionClass.LEAVING
    return f"heading:{kind.value}:{sector}"


def _group_key(d: Detection, cell: float, center: np.ndarray) -> Tuple[int, int, str]:
    ix, iy = math.floor(d.x / cell), math.floor(d.y / cell)
    if d.direction_class is not None:
        label = d.direction_class.value
    elif d.heading is None:
        label = classify_doppler(d.doppler).value
    else:
        label = _heading_label(d, np.array([ix + 0.5, iy + 0.5]) * cell, center)
    return (ix, iy, label)


def voxelize(detections: Iterable[Detection], cell: float = 1.0, center: Optional[Point2] = None) -> List[Detection]:
    """Merge detections sharing a grid cell and a direction class.

    Oriented detections are classed against `center` (the centroid of the
    input when not given) and additionally by heading sector. Merged
    detections sit at the mean position with the circular-mean orientation;
    single detections are passed through untouched.
    """
    if cell <= 0.0:
        raise ValueError("voxel cell must be positive")
    detections = list(detections)
    if not detections:
        return []
    c = center.as_array() if center is not None else np.array([[d.x, d.y] for d in detections]).mean(axis=0)
    groups: Dict[Tuple[int, int, str], List[Detection]] = {}
    for d in detections:
        groups.setdefault(_group_key(d, cell, c), []).append(d)

    merged = []
    for (_, _, label), members in groups.items():
        if len(members) == 1:
            merged.append(members[0])
            continue
        xy = np.array([[d.x, d.y] for d in members])
        mean = xy.mean(axis=0)
        if label.startswith("heading:"):
            heading = circular_mean(np.array([d.heading.as_array() for d in members]))
            merged.append(Detection(x=mean[0], y=mean[1], heading=Direction2.from_array(heading)))
        else:
            merged.append(Detection(x=mean[0], y=mean[1], direction_class=DirectionClass(label)))
    return merged


def prepare_detections(detections: Iterable[Detection], cfg: IngestConfig, center: Optional[Point2] = None) -> List[Detection]:
    """Static filter, Doppler classification and voxelization of raw detections."""
    raw = list(detections)
    moving = filter_static(raw, cfg.doppler_threshold)
    reduced = voxelize(classify_detections(moving), cfg.voxel_cell, center)
    logger.info(f"Prepared detections: {len(raw)} raw, {len(moving)} moving, {len(reduced)} after voxelization")
    return reduced


def split_trajectory(t: Trajectory, center: Point2) -> Tuple[Trajectory, Trajectory]:
    """Cut a trajectory at its point closest to the center.

    Returns:
        (incoming part up to and including the closest point, outgoing remainder);
        a part is empty when the trajectory does not pass the intersection
    """
    xy = t.xy()
    split = int(np.argmin(np.hypot(xy[:, 0] - center.x, xy[:, 1] - center.y)))
    incoming = Trajectory(id=t.id, points=t.points[: split + 1])
    outgoing = Trajectory(id=t.id, points=t.points[split + 1:])
    return incoming, outgoing


def reduce_track(part: Trajectory, center: Point2) -> TrackSummary:
    """Reduce a trajectory part to its mean point and mean driving direction.

    The part is Entering when it ends closer to the center than it starts.

    Raises:
        ValueError: If the part has fewer than 2 points
    """
    if len(part.points) < 2:
        raise ValueError(f"trajectory part {part.id} needs at least 2 points for a heading")
    xy = part.xy()
    steps = np.diff(xy, axis=0)
    lengths = np.linalg.norm(steps, axis=1)
    moving = lengths > 1e-9
    if not moving.any():
        raise ValueError(f"trajectory part {part.id} does not move")
    heading = circular_mean(steps[moving] / lengths[moving, None])
    c = center.as_array()
    toward = np.linalg.norm(xy[-1] - c) < np.linalg.norm(xy[0] - c)
    return TrackSummary(
        mean_position=Point2.from_array(xy.mean(axis=0)),
        mean_direction=Direction2.from_array(heading),
        direction_class=DirectionClass.ENTERING if toward else DirectionClass.LEAVING,
        source_id=part.id,
        weight=len(part.points),
    )


def summarize_trajectories(trajectories: Iterable[Trajectory], center: Point2) -> List[TrackSummary]:
    """Split every trajectory at the center and reduce the usable parts."""
    summaries = []
    for trajectory in trajectories:
        for part in split_trajectory(trajectory, center):
            if len(part.points) < 2:
                continue
            try:
                summaries.append(reduce_track(part, center))
            except ValueError as e:
                logger.debug(f"Skipping part of {trajectory.id}: {e}")
    return summaries


def trajectory_centroid(trajectories: Iterable[Trajectory]) -> Point2:
    """Mean of all trajectory points, the split center when nothing better is known."""
    stacked = [t.xy() for t in trajectories if len(t.points)]
    if not stacked:
        raise ValueError("no trajectory points to take a centroid of")
    return Point2.from_array(np.vstack(stacked).mean(axis=0))


def load_document(path: Path, model: Type[DocumentT]) -> DocumentT:
    """Parse a JSON document into a pydantic model with path/line/field context on failure."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise IntersectionMcmcError(f"Cannot read {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DatasetParseError(str(path), f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise DatasetParseError(str(path), f"field '{location}': {first['msg']}") from e


def write_document(payload: dict, path: Path) -> Path:
    """Write a JSON document deterministically (sorted keys, fixed indentation)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise IntersectionMcmcError(f"Cannot write {path}: {e}") from e
    return path


def load_dataset(path: Path) -> Dataset:
    """Read a dataset document (`detections` and `trajectories`)."""
    return load_document(path, Dataset)


def dump_dataset(dataset: Dataset) -> dict:
    return dataset.model_dump(mode="json", by_alias=True, exclude_none=True)


def save_dataset(dataset: Dataset, path: Path) -> Path:
    return write_document(dump_dataset(dataset), path)


def split_center(dataset: Dataset, seed_center: Optional[List[float]] = None) -> Point2:
    """Center used for trajectory splitting: explicit seed, recorded center, or centroid."""
    if seed_center is not None:
        return Point2(x=seed_center[0], y=seed_center[1])
    if dataset.center is not None:
        return dataset.center
    return trajectory_centroid(dataset.trajectories)

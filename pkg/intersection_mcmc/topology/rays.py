"""
Straight lane geometry of the stage-1 model.

Lateral offsets are measured along the clockwise normal of the arm axis
(sin h, −cos h). Entering lanes get negative offsets, leaving lanes positive
ones, so traffic keeps to the right.
"""

import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..config import TopologyConfig
from ..geometry import Polyline
from ..models.measurement import DirectionClass
from ..models.topology import Arm, TopologyModel

LaneRef = Tuple[DirectionClass, int]

DIRECTION_CODES = {DirectionClass.ENTERING: 0, DirectionClass.LEAVING: 1}


def axis(heading: float) -> np.ndarray:
    return np.array([math.cos(heading), math.sin(heading)])


def clockwise_normal(heading: float) -> np.ndarray:
    return np.array([math.sin(heading), -math.cos(heading)])


def lateral_offset(arm: Arm, direction: DirectionClass, offset_index: int) -> float:
    """Signed offset of a lane center from the arm axis."""
    lanes = arm.lanes(direction)
    magnitude = arm.gap / 2.0 + sum(l.width for l in lanes[:offset_index]) + lanes[offset_index].width / 2.0
    return -magnitude if direction == DirectionClass.ENTERING else magnitude


def mouth_distance(model: TopologyModel, arm_index: int, cfg: TopologyConfig) -> float:
    """Distance from the center at which an arm's lanes start.

    Chosen so the arm's strip clears both angular neighbours.
    """
    return float(mouth_distances(model, cfg)[arm_index])


def lane_center_ray(model: TopologyModel, arm_index: int, lane_ref: LaneRef, cfg: TopologyConfig) -> Polyline:
    """Two-point center line of a lane, from the arm mouth outward."""
    start, end = _ray_points(model, arm_index, lane_ref, mouth_distance(model, arm_index, cfg), cfg.ray_length)
    return Polyline.from_array(np.vstack([start, end]))


def _ray_points(model: TopologyModel, arm_index: int, lane_ref: LaneRef, mouth: float, length: float):
    arm = model.arms[arm_index]
    direction, offset_index = lane_ref
    u = axis(arm.heading)
    start = model.center.as_array() + mouth * u + lateral_offset(arm, direction, offset_index) * clockwise_normal(arm.heading)
    return start, start + length * u


def travel_direction(heading: float, direction: DirectionClass) -> np.ndarray:
    """Unit vector vehicles on the lane drive along."""
    u = axis(heading)
    return -u if direction == DirectionClass.ENTERING else u


class LaneTable(BaseModel):
    """All lane rays of a model as arrays, in TopologyModel.lane_refs() order."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    starts: np.ndarray
    ends: np.ndarray
    travel: np.ndarray
    codes: np.ndarray
    refs: List[Tuple[int, DirectionClass, int]]

    def __len__(self) -> int:
        return len(self.refs)


def mouth_distances(model: TopologyModel, cfg: TopologyConfig) -> np.ndarray:
    """mouth_distance of every arm at once."""
    n = len(model.arms)
    if n == 0:
        return np.zeros(0)
    headings = np.array([arm.heading for arm in model.arms])
    half = np.array([arm.half_width for arm in model.arms])
    required = np.zeros(n)
    if n > 1:
        for shift in (1, -1):
            separation = np.abs(headings - np.roll(headings, shift)) % (2.0 * math.pi)
            separation = np.minimum(separation, 2.0 * math.pi - separation)
            widest = np.maximum(half, np.roll(half, shift))
            with np.errstate(divide="ignore"):
                needed = np.where(
                    separation < math.pi - 1e-9,
                    widest / np.tan(separation / 2.0) + cfg.mouth_margin,
                    0.0,
                )
            required = np.maximum(required, needed)
    return np.maximum(cfg.min_mouth_distance, required)


def lane_table(model: TopologyModel, cfg: TopologyConfig) -> LaneTable:
    refs = model.lane_refs()
    if not refs:
        empty = np.zeros((0, 2))
        return LaneTable(starts=empty, ends=empty, travel=empty, codes=np.zeros(0, dtype=int), refs=refs)

    mouths = mouth_distances(model, cfg)
    arm_index, offsets, codes = [], [], []
    for i, arm in enumerate(model.arms):
        for direction, sign in ((DirectionClass.ENTERING, -1.0), (DirectionClass.LEAVING, 1.0)):
            edge = arm.gap / 2.0
            for lane in arm.lanes(direction):
                arm_index.append(i)
                offsets.append(sign * (edge + lane.width / 2.0))
                codes.append(DIRECTION_CODES[direction])
                edge += lane.width

    index = np.array(arm_index)
    headings = np.array([arm.heading for arm in model.arms])[index]
    u = np.column_stack([np.cos(headings), np.sin(headings)])
    normal = np.column_stack([u[:, 1], -u[:, 0]])
    codes = np.array(codes, dtype=int)
    starts = model.center.as_array() + mouths[index, None] * u + np.array(offsets)[:, None] * normal
    return LaneTable(
        starts=starts,
        ends=starts + cfg.ray_length * u,
        travel=np.where(codes[:, None] == DIRECTION_CODES[DirectionClass.ENTERING], -u, u),
        codes=codes,
        refs=refs,
    )

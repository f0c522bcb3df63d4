"""
Topology proposal kernel: every step changes exactly one parameter.

Moves register with the "topology" kernel in order, so a uniform draw ω picks
rotate (< 0.4), shift center (< 0.6), change gap (< 0.7), add/remove arm
(< 0.85) or add/remove lane. A move that would break the structural bounds
returns the input model unchanged.
"""

import math
from typing import List, Optional

import numpy as np

from ..config import TopologyConfig
from ..engine.registry import get_move, move, select_move
from ..geometry import Point2
from ..models.measurement import DirectionClass
from ..models.topology import Arm, Lane, TopologyModel

KERNEL = "topology"

MAX_ROTATION = math.radians(6.0)
MAX_CENTER_SHIFT = 6.0
MAX_GAP_CHANGE = 1.8
MIN_ARMS = 2


def is_valid(model: TopologyModel, cfg: TopologyConfig) -> bool:
    """Structural bounds: at least two arms, a lane per arm, arms apart by min_arm_angle."""
    if len(model.arms) < MIN_ARMS:
        return False
    if any(arm.lane_count == 0 for arm in model.arms):
        return False
    headings = [arm.heading for arm in model.arms]
    for i, heading in enumerate(headings):
        following = headings[(i + 1) % len(headings)]
        separation = (following - heading) % (2.0 * math.pi)
        if separation < cfg.min_arm_angle - 1e-9:
            return False
    return True


def _relane(lanes: List[Lane], direction: DirectionClass) -> List[Lane]:
    return [Lane(direction=direction, width=l.width, offset_index=k) for k, l in enumerate(lanes)]


def _rebuild(model: TopologyModel, arms: List[Arm], center: Optional[Point2] = None) -> TopologyModel:
    return TopologyModel(center=center or model.center, arms=arms)


def _accept_if_valid(model: TopologyModel, candidate: TopologyModel, cfg: TopologyConfig) -> TopologyModel:
    return candidate if is_valid(candidate, cfg) else model


@move(KERNEL, "rotate_arm", 0.4, "rotate a random arm by U[-6°, 6°]")
def rotate_arm(model: TopologyModel, cfg: TopologyConfig, rng: np.random.Generator) -> TopologyModel:
    i = int(rng.integers(len(model.arms)))
    delta = rng.uniform(-MAX_ROTATION, MAX_ROTATION)
    arms = list(model.arms)
    arms[i] = arms[i].model_copy(update={"heading": (arms[i].heading + delta) % (2.0 * math.pi)})
    return _accept_if_valid(model, _rebuild(model, arms), cfg)


@move(KERNEL, "shift_center", 0.2, "shift the center by a polar step in U([0, 6 m] × [0, 2π])")
def shift_center(model: TopologyModel, cfg: TopologyConfig, rng: np.random.Generator) -> TopologyModel:
    distance = rng.uniform(0.0, MAX_CENTER_SHIFT)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    center = Point2(x=model.center.x + distance * math.cos(phi), y=model.center.y + distance * math.sin(phi))
    return _rebuild(model, list(model.arms), center)


@move(KERNEL, "change_gap", 0.1, "change one arm's gap by U[-1.8 m, 1.8 m], clamped at 0")
def change_gap(model: TopologyModel, cfg: TopologyConfig, rng: np.random.Generator) -> TopologyModel:
    i = int(rng.integers(len(model.arms)))
    delta = rng.uniform(-MAX_GAP_CHANGE, MAX_GAP_CHANGE)
    arms = list(model.arms)
    arms[i] = arms[i].model_copy(update={"gap": max(0.0, arms[i].gap + delta)})
    return _accept_if_valid(model, _rebuild(model, arms), cfg)


def _largest_gap_heading(model: TopologyModel) -> float:
    headings = [arm.heading for arm in model.arms]
    best_start, best_width = 0.0, -1.0
    for i, heading in enumerate(headings):
        width = (headings[(i + 1) % len(headings)] - heading) % (2.0 * math.pi)
        if len(headings) == 1:
            width = 2.0 * math.pi
        if width > best_width:
            best_start, best_width = heading, width
    return (best_start + best_width / 2.0) % (2.0 * math.pi)


def _fresh_arm(heading: float, cfg: TopologyConfig) -> Arm:
    return Arm(
        heading=heading,
        gap=0.0,
        lanes_in=[Lane(direction=DirectionClass.ENTERING, width=cfg.lane_width_default)],
        lanes_out=[Lane(direction=DirectionClass.LEAVING, width=cfg.lane_width_default)],
    )


@move(KERNEL, "add_remove_arm", 0.15, "add an arm (largest gap or split) or remove a random arm")
def add_remove_arm(model: TopologyModel, cfg: TopologyConfig, rng: np.random.Generator) -> TopologyModel:
    arms = list(model.arms)
    if rng.random() < 0.5:
        if rng.random() < 0.5:
            arms.append(_fresh_arm(_largest_gap_heading(model), cfg))
        else:
            source = arms[int(rng.integers(len(arms)))]
            sign = 1.0 if rng.random() < 0.5 else -1.0
            arms.append(source.model_copy(
                update={"heading": (source.heading + sign * cfg.min_arm_angle) % (2.0 * math.pi)},
                deep=True,
            ))
    else:
        if len(arms) <= MIN_ARMS:
            return model
        arms.pop(int(rng.integers(len(arms))))
    return _accept_if_valid(model, _rebuild(model, arms), cfg)


@move(KERNEL, "add_remove_lane", 0.15, "add a lane at the medial strip or outer border, or remove a random lane")
def add_remove_lane(model: TopologyModel, cfg: TopologyConfig, rng: np.random.Generator) -> TopologyModel:
    arms = list(model.arms)
    if rng.random() < 0.5:
        i = int(rng.integers(len(arms)))
        direction = DirectionClass.ENTERING if rng.random() < 0.5 else DirectionClass.LEAVING
        lanes = list(arms[i].lanes(direction))
        new_lane = Lane(direction=direction, width=cfg.lane_width_default)
        if rng.random() < 0.5:
            lanes.insert(0, new_lane)
        else:
            lanes.append(new_lane)
    else:
        refs = model.lane_refs()
        i, direction, k = refs[int(rng.integers(len(refs)))]
        if arms[i].lane_count <= 1:
            return model
        lanes = list(arms[i].lanes(direction))
        lanes.pop(k)
    field = "lanes_in" if direction == DirectionClass.ENTERING else "lanes_out"
    arms[i] = arms[i].model_copy(update={field: _relane(lanes, direction)})
    return _accept_if_valid(model, _rebuild(model, arms), cfg)


def apply_move(name: str, model: TopologyModel, cfg: TopologyConfig, rng: np.random.Generator) -> TopologyModel:
    entry = get_move(KERNEL, name)
    if entry is None:
        raise ValueError(f"Move {name} not found")
    return entry["function"](model, cfg, rng)


def propose_topology(model: TopologyModel, cfg: TopologyConfig, rng: np.random.Generator) -> TopologyModel:
    """Draw ω ~ U[0, 1) and apply the move it selects."""
    return apply_move(select_move(KERNEL, rng.random()), model, cfg, rng)

"""
Lane-course proposal kernel: move a border pair, split a shared point, or merge two points.

Each move has probability 1/3. Changed lanelets get a fresh revision and a
recomputed center line; unchanged lanelets are carried over as-is.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import LaneCourseConfig
from ..engine.registry import get_move, move, select_move
from ..geometry import vertex_normals
from ..models.lanelet import Lanelet, LaneletModel, PointRef
from .preprocess import compute_center_line, next_revision

KERNEL = "lane_course"


class _Edit:
    """Pending point writes against a model, committed as one new model."""

    def __init__(self, model: LaneletModel):
        self.model = model
        self.borders: Dict[Tuple[str, str], np.ndarray] = {}
        self.shares: Optional[Dict[PointRef, PointRef]] = None

    def set(self, ref: PointRef, xy: np.ndarray) -> None:
        key = (ref.lanelet, ref.side)
        if key not in self.borders:
            self.borders[key] = self.model.lanelets[ref.lanelet].border(ref.side).copy()
        self.borders[key][ref.index] = xy

    def set_joint(self, ref: PointRef, xy: np.ndarray) -> None:
        """Write a point and its shared partner, if any."""
        self.set(ref, xy)
        partner = self.model.shares.get(ref)
        if partner is not None:
            self.set(partner, xy)

    def unshare(self, a: PointRef, b: PointRef) -> None:
        self._own_shares()
        self.shares.pop(a, None)
        self.shares.pop(b, None)

    def share(self, a: PointRef, b: PointRef) -> None:
        self._own_shares()
        self.shares[a] = b
        self.shares[b] = a

    def _own_shares(self) -> None:
        if self.shares is None:
            self.shares = dict(self.model.shares)

    def commit(self) -> LaneletModel:
        lanelets = dict(self.model.lanelets)
        center_lines = dict(self.model.center_lines)
        changed = {lid for lid, _ in self.borders}
        for lid in changed:
            lanelet = lanelets[lid]
            update = {side: border for (owner, side), border in self.borders.items() if owner == lid}
            update["revision"] = next_revision()
            lanelet = lanelet.model_copy(update=update)
            if not borders_ordered(lanelet):
                return self.model
            lanelets[lid] = lanelet
            center_lines[lid] = compute_center_line(lanelet)
        update = {"lanelets": lanelets, "center_lines": center_lines}
        if self.shares is not None:
            update["shares"] = self.shares
        return self.model.model_copy(update=update)


def borders_ordered(lanelet: Lanelet) -> bool:
    """Whether the left border stays left of the right border at every point pair."""
    mids = (lanelet.left + lanelet.right) / 2.0
    across = lanelet.left - lanelet.right
    return bool(np.all(np.einsum("ij,ij->i", across, vertex_normals(mids)) > 0.0))


def _pair_index(model: LaneletModel) -> List[Tuple[str, int]]:
    return [(lid, i) for lid, lanelet in model.lanelets.items() for i in range(len(lanelet))]


@move(KERNEL, "move_point", 1.0 / 3.0, "shift a random border pair along its normal by N(0, move_sigma)")
def move_point(model: LaneletModel, cfg: LaneCourseConfig, rng: np.random.Generator) -> LaneletModel:
    pairs = _pair_index(model)
    if not pairs:
        return model
    lid, i = pairs[int(rng.integers(len(pairs)))]
    lanelet = model.lanelets[lid]
    normal = vertex_normals((lanelet.left + lanelet.right) / 2.0)[i]
    delta = rng.normal(0.0, cfg.move_sigma) * normal
    edit = _Edit(model)
    edit.set_joint(PointRef(lid, "left", i), lanelet.left[i] + delta)
    edit.set_joint(PointRef(lid, "right", i), lanelet.right[i] + delta)
    return edit.commit()


@move(KERNEL, "split_point", 1.0 / 3.0, "separate a shared point pair by U[0, split_max] in a random direction")
def split_point(model: LaneletModel, cfg: LaneCourseConfig, rng: np.random.Generator) -> LaneletModel:
    shared = model.shared_pairs()
    if not shared:
        return model
    a, b = shared[int(rng.integers(len(shared)))]
    displaced = a if rng.random() < 0.5 else b
    distance = rng.uniform(0.0, cfg.split_max)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    edit = _Edit(model)
    edit.unshare(a, b)
    edit.set(displaced, model.position(displaced) + distance * np.array([np.cos(angle), np.sin(angle)]))
    return edit.commit()


def mergeable(model: LaneletModel) -> List[Tuple[PointRef, PointRef]]:
    """Candidate pairs whose points are both currently unshared."""
    return [(a, b) for a, b in model.candidates if a not in model.shares and b not in model.shares]


@move(KERNEL, "merge_points", 1.0 / 3.0, "fuse a candidate pair at the position of one of its points")
def merge_points(model: LaneletModel, cfg: LaneCourseConfig, rng: np.random.Generator) -> LaneletModel:
    pool = mergeable(model)
    if not pool:
        return model
    a, b = pool[int(rng.integers(len(pool)))]
    survivor = model.position(a) if rng.random() < 0.5 else model.position(b)
    edit = _Edit(model)
    edit.set(a, survivor.copy())
    edit.set(b, survivor.copy())
    edit.share(a, b)
    return edit.commit()


def apply_move(name: str, model: LaneletModel, cfg: LaneCourseConfig, rng: np.random.Generator) -> LaneletModel:
    entry = get_move(KERNEL, name)
    if entry is None:
        raise ValueError(f"Move {name} not found")
    return entry["function"](model, cfg, rng)


def propose_course(model: LaneletModel, cfg: LaneCourseConfig, rng: np.random.Generator) -> LaneletModel:
    """Draw ω ~ U[0, 1) and apply the move it selects."""
    return apply_move(select_move(KERNEL, rng.random()), model, cfg, rng)

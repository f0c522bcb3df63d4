"""
Stage-2 lane-course model: lanelets with optionally shared border points.

Border geometry is held in numpy arrays for scoring speed; the map file
carries the per-point view with sharing cross-references.
"""

from typing import Dict, List, Literal, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import LaneletModelError
from .measurement import DirectionClass

Side = Literal["left", "right"]


class PointRef(NamedTuple):
    """Address of one border point."""
    lanelet: str
    side: str
    index: int


class Lanelet(BaseModel):
    """A lane segment bounded by a left and a right border polyline.

    Points are ordered in driving direction. `revision` changes whenever the
    geometry does, which lets scorers cache per-lanelet terms.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    id: str
    kind: Literal["lane", "connection"] = "lane"
    left: np.ndarray = Field(..., description="(n, 2) left border points")
    right: np.ndarray = Field(..., description="(n, 2) right border points")
    arm_index: Optional[int] = Field(None, description="Arm of a lane lanelet")
    direction: Optional[DirectionClass] = Field(None, description="Direction of a lane lanelet")
    lane_index: Optional[int] = Field(None, description="Offset index of a lane lanelet")
    connects: Optional[Tuple[str, str]] = Field(None, description="Entering and leaving lanelet of a connection")
    revision: int = 0

    @model_validator(mode="after")
    def _paired(self) -> "Lanelet":
        left = np.asarray(self.left, dtype=float)
        right = np.asarray(self.right, dtype=float)
        if left.ndim != 2 or left.shape[1] != 2 or left.shape != right.shape:
            raise ValueError(f"lanelet {self.id}: borders must be matching (n, 2) arrays")
        if left.shape[0] < 2:
            raise ValueError(f"lanelet {self.id}: borders need at least 2 points")
        self.left = left
        self.right = right
        return self

    def __len__(self) -> int:
        return self.left.shape[0]

    def border(self, side: str) -> np.ndarray:
        return self.left if side == "left" else self.right


class CenterLine(BaseModel):
    """Midpoints of opposing border points with doubled discretization."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: np.ndarray = Field(..., description="(2n − 1, 2) center points")


class LaneletModel(BaseModel):
    """An intersection I_2 as a set of lanelets with shared border points.

    `shares` holds both directions of every shared pair. `assignments` maps a
    trajectory id to the lanelet path it is scored against.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    lanelets: Dict[str, Lanelet] = Field(default_factory=dict)
    center_lines: Dict[str, CenterLine] = Field(default_factory=dict)
    assignments: Dict[str, List[str]] = Field(default_factory=dict)
    shares: Dict[PointRef, PointRef] = Field(default_factory=dict)
    candidates: List[Tuple[PointRef, PointRef]] = Field(default_factory=list)

    @property
    def shared_pair_count(self) -> int:
        return len(self.shares) // 2

    def shared_pairs(self) -> List[Tuple[PointRef, PointRef]]:
        return sorted((a, b) for a, b in self.shares.items() if a < b)

    def position(self, ref: PointRef) -> np.ndarray:
        return self.lanelets[ref.lanelet].border(ref.side)[ref.index]

    def check_invariants(self) -> None:
        """Raise LaneletModelError when sharing is asymmetric or references are dangling."""
        for a, b in self.shares.items():
            if self.shares.get(b) != a:
                raise LaneletModelError(f"asymmetric sharing between {a} and {b}")
            for ref in (a, b):
                if ref.lanelet not in self.lanelets or not 0 <= ref.index < len(self.lanelets[ref.lanelet]):
                    raise LaneletModelError(f"dangling border reference {ref}")
        for trajectory_id, path in self.assignments.items():
            missing = [lid for lid in path if lid not in self.lanelets]
            if missing:
                raise LaneletModelError(f"trajectory {trajectory_id} assigned to missing lanelets {missing}")


__all__ = ["PointRef", "Lanelet", "CenterLine", "LaneletModel"]

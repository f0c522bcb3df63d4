"""
Stage-1 intersection model: a center point with arms of straight lanes.
"""

import math
from typing import List, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from ..geometry import Point2
from .measurement import DirectionClass


class Lane(BaseModel):
    """A straight lane of an arm; offset_index 0 is the lane next to the gap."""
    direction: DirectionClass
    width: float = Field(3.5, gt=0.0, description="Lane width in meters")
    offset_index: int = Field(0, ge=0, description="Position within its direction group, counted from the gap")


class Arm(BaseModel):
    """One road branch: absolute heading, medial gap and directed lanes."""
    heading: float = Field(..., description="Outward heading in radians, world frame")
    gap: float = Field(0.0, ge=0.0, description="Width of the separation between directions in meters")
    lanes_in: List[Lane] = Field(default_factory=list, description="Entering lanes, gap side first")
    lanes_out: List[Lane] = Field(default_factory=list, description="Leaving lanes, gap side first")

    @field_validator("heading")
    @classmethod
    def _wrap(cls, heading: float) -> float:
        if not math.isfinite(heading):
            raise ValueError("heading must be finite")
        return heading % (2.0 * math.pi)

    @model_validator(mode="after")
    def _has_lanes(self) -> "Arm":
        if not self.lanes_in and not self.lanes_out:
            raise ValueError("an arm needs at least one lane")
        return self

    def lanes(self, direction: DirectionClass) -> List[Lane]:
        return self.lanes_in if direction == DirectionClass.ENTERING else self.lanes_out

    @property
    def lane_count(self) -> int:
        return len(self.lanes_in) + len(self.lanes_out)

    @property
    def half_width(self) -> float:
        """Largest lateral extent of the arm from its axis."""
        inner = self.gap / 2.0
        return inner + max(
            sum(l.width for l in self.lanes_in),
            sum(l.width for l in self.lanes_out),
        )


class TopologyModel(BaseModel):
    """An intersection I = (c, A) with arms sorted by heading."""
    center: Point2
    arms: List[Arm] = Field(default_factory=list)

    @field_validator("arms")
    @classmethod
    def _sorted(cls, arms: List[Arm]) -> List[Arm]:
        return sorted(arms, key=lambda a: a.heading)

    @property
    def lane_count(self) -> int:
        return sum(a.lane_count for a in self.arms)

    def lane_refs(self) -> List[Tuple[int, DirectionClass, int]]:
        """All lanes as (arm index, direction, offset index)."""
        refs = []
        for i, arm in enumerate(self.arms):
            for direction in (DirectionClass.ENTERING, DirectionClass.LEAVING):
                refs.extend((i, direction, k) for k in range(len(arm.lanes(direction))))
        return refs

    def lane_counts(self) -> List[Tuple[int, int]]:
        """Per arm (|L^i|, |L^o|) in heading order."""
        return [(len(a.lanes_in), len(a.lanes_out)) for a in self.arms]


__all__ = ["Lane", "Arm", "TopologyModel"]

"""
Measurement models: detections, trajectories and reduced track summaries.

Field aliases match the dataset file format (`x`, `y`, `t`, `dir`, `heading`,
`doppler`), so the same models parse and write dataset documents.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from ..geometry import Direction2, Point2


class DirectionClass(str, Enum):
    """Driving direction relative to the intersection."""
    ENTERING = "entering"
    LEAVING = "leaving"


class Detection(BaseModel):
    """A point detection with a direction class or an orientation."""
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    x: float = Field(..., description="East coordinate in meters")
    y: float = Field(..., description="North coordinate in meters")
    timestamp: Optional[float] = Field(None, alias="t", description="Time in seconds")
    direction_class: Optional[DirectionClass] = Field(None, alias="dir", description="Entering or leaving")
    heading: Optional[Direction2] = Field(None, description="Orientation vector [dx, dy]")
    doppler: Optional[float] = Field(None, description="Compensated Doppler velocity in m/s")

    @field_validator("heading", mode="before")
    @classmethod
    def _parse_heading(cls, value: Any) -> Any:
        if isinstance(value, (list, tuple)):
            return Direction2(dx=value[0], dy=value[1])
        return value

    @field_serializer("heading")
    def _dump_heading(self, heading: Optional[Direction2]) -> Optional[List[float]]:
        return None if heading is None else [heading.dx, heading.dy]

    @model_validator(mode="after")
    def _one_direction(self) -> "Detection":
        if self.direction_class is not None and self.heading is not None:
            raise ValueError("a detection carries either 'dir' or 'heading', not both")
        if self.direction_class is None and self.heading is None and self.doppler is None:
            raise ValueError("a detection needs 'dir', 'heading' or 'doppler'")
        return self

    @property
    def position(self) -> Point2:
        return Point2(x=self.x, y=self.y)


class Trajectory(BaseModel):
    """A time-ordered sequence of detections of one tracked object.

    Split parts may be empty; anything reduced or scored needs two points.
    """
    model_config = ConfigDict(frozen=True)

    id: str = Field(..., description="Track identifier")
    points: List[Detection] = Field(default_factory=list, description="Detections in time order")

    @field_validator("id", mode="before")
    @classmethod
    def _id_as_string(cls, value: Any) -> Any:
        return str(value) if isinstance(value, int) else value

    @field_validator("points")
    @classmethod
    def _time_ordered(cls, points: List[Detection]) -> List[Detection]:
        times = [p.timestamp for p in points]
        if any(t is None for t in times):
            raise ValueError("trajectory points need a timestamp 't'")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("trajectory timestamps must be strictly increasing")
        return points

    def xy(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.points], dtype=float).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.points)


class TrackSummary(BaseModel):
    """A trajectory part reduced to its mean point and mean heading."""
    model_config = ConfigDict(frozen=True)

    mean_position: Point2
    mean_direction: Direction2
    direction_class: DirectionClass
    source_id: str
    weight: int = Field(..., ge=1, description="Number of reduced points")


class Dataset(BaseModel):
    """A measurement document: raw detections and/or tracked trajectories."""
    name: str = Field("dataset", description="Intersection name")
    detections: List[Detection] = Field(default_factory=list)
    trajectories: List[Trajectory] = Field(default_factory=list)
    center: Optional[Point2] = Field(None, description="Split center recorded by the generator")
    seed: Optional[int] = Field(None, description="Seed the document was produced with")
    config: Optional[Dict[str, Any]] = Field(None, description="Resolved config the document was produced with")

    @field_validator("trajectories")
    @classmethod
    def _scorable(cls, trajectories: List[Trajectory]) -> List[Trajectory]:
        for trajectory in trajectories:
            if len(trajectory.points) < 2:
                raise ValueError(f"trajectory {trajectory.id} has fewer than 2 points")
        return trajectories


__all__ = ["DirectionClass", "Detection", "Trajectory", "TrackSummary", "Dataset"]

"""
Lanelet map and topology documents.

A lanelet map lists every lanelet with left/right border points (each with an
optional cross-reference to the point it shares), its center line and the
trajectory-to-lanelet assignments.
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..errors import DatasetParseError, LaneletModelError
from ..ingest import load_document, write_document
from ..models.lanelet import Lanelet, LaneletModel, PointRef
from ..models.measurement import DirectionClass
from ..models.topology import TopologyModel
from .preprocess import compute_center_line


class PointRefRecord(BaseModel):
    lanelet: str
    side: Literal["left", "right"]
    index: int = Field(..., ge=0)


class BorderPointRecord(BaseModel):
    x: float
    y: float
    shared_with: Optional[PointRefRecord] = None


class LaneletRecord(BaseModel):
    """One lanelet as written to a map document."""
    id: str
    kind: Literal["lane", "connection"] = "lane"
    arm_index: Optional[int] = None
    direction: Optional[DirectionClass] = None
    lane_index: Optional[int] = None
    connects: Optional[Tuple[str, str]] = None
    left: List[BorderPointRecord]
    right: List[BorderPointRecord]
    center_line: List[Tuple[float, float]] = Field(default_factory=list)


class LaneletMapDocument(BaseModel):
    seed: Optional[int] = None
    config: Optional[Dict[str, Any]] = None
    log_posterior: Optional[float] = None
    lanelets: List[LaneletRecord] = Field(default_factory=list)
    assignments: Dict[str, List[str]] = Field(default_factory=dict)


class TopologyDocument(BaseModel):
    seed: Optional[int] = None
    config: Optional[Dict[str, Any]] = None
    log_posterior: Optional[float] = None
    topology: TopologyModel


def _points(model: LaneletModel, lanelet: Lanelet, side: str) -> List[BorderPointRecord]:
    records = []
    for i, (x, y) in enumerate(lanelet.border(side).tolist()):
        partner = model.shares.get(PointRef(lanelet.id, side, i))
        records.append(BorderPointRecord(
            x=x, y=y,
            shared_with=PointRefRecord(lanelet=partner.lanelet, side=partner.side, index=partner.index) if partner else None,
        ))
    return records


def lanelet_records(model: LaneletModel) -> List[LaneletRecord]:
    return [
        LaneletRecord(
            id=lanelet.id,
            kind=lanelet.kind,
            arm_index=lanelet.arm_index,
            direction=lanelet.direction,
            lane_index=lanelet.lane_index,
            connects=lanelet.connects,
            left=_points(model, lanelet, "left"),
            right=_points(model, lanelet, "right"),
            center_line=[tuple(p) for p in model.center_lines[lanelet.id].points.tolist()],
        )
        for lanelet in model.lanelets.values()
    ]


def model_from_records(records: List[LaneletRecord], assignments: Optional[Dict[str, List[str]]] = None) -> LaneletModel:
    """Rebuild a LaneletModel; center lines are recomputed from the borders."""
    lanelets: Dict[str, Lanelet] = {}
    shares: Dict[PointRef, PointRef] = {}
    for record in records:
        lanelets[record.id] = Lanelet(
            id=record.id,
            kind=record.kind,
            left=np.array([[p.x, p.y] for p in record.left], dtype=float),
            right=np.array([[p.x, p.y] for p in record.right], dtype=float),
            arm_index=record.arm_index,
            direction=record.direction,
            lane_index=record.lane_index,
            connects=record.connects,
        )
        for side, points in (("left", record.left), ("right", record.right)):
            for i, p in enumerate(points):
                if p.shared_with is not None:
                    shares[PointRef(record.id, side, i)] = PointRef(p.shared_with.lanelet, p.shared_with.side, p.shared_with.index)
    model = LaneletModel(
        lanelets=lanelets,
        center_lines={lid: compute_center_line(l) for lid, l in lanelets.items()},
        assignments=assignments or {},
        shares=shares,
    )
    model.check_invariants()
    return model


def lanelet_map_document(
    model: LaneletModel,
    seed: Optional[int] = None,
    config: Optional[Dict[str, Any]] = None,
    log_posterior: Optional[float] = None,
) -> dict:
    document = LaneletMapDocument(
        seed=seed,
        config=config,
        log_posterior=log_posterior,
        lanelets=lanelet_records(model),
        assignments=model.assignments,
    )
    return document.model_dump(mode="json", exclude_none=True)


def save_lanelet_map(model: LaneletModel, path: Path, **envelope: Any) -> Path:
    return write_document(lanelet_map_document(model, **envelope), path)


def load_lanelet_map(path: Path) -> LaneletModel:
    """Read a lanelet map document.

    Raises:
        DatasetParseError: If the document is malformed or its sharing cross-references are inconsistent
    """
    document = load_document(path, LaneletMapDocument)
    try:
        return model_from_records(document.lanelets, document.assignments)
    except LaneletModelError as e:
        raise DatasetParseError(str(path), str(e)) from e


def save_topology(topology: TopologyModel, path: Path, **envelope: Any) -> Path:
    document = TopologyDocument(topology=topology, **envelope)
    return write_document(document.model_dump(mode="json", exclude_none=True), path)


def load_topology(path: Path) -> TopologyModel:
    return load_document(path, TopologyDocument).topology


__all__ = [
    "PointRefRecord",
    "BorderPointRecord",
    "LaneletRecord",
    "LaneletMapDocument",
    "TopologyDocument",
    "lanelet_records",
    "model_from_records",
    "lanelet_map_document",
    "save_lanelet_map",
    "load_lanelet_map",
    "save_topology",
    "load_topology",
]

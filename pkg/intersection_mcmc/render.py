"""
SVG drawings of datasets, estimates and ground truth in one world frame.

Each input file becomes a layer (an SVG group with a stable id): detections,
trajectories, estimated lanelets, estimated topology rays and ground truth.
"""

import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.collections import LineCollection
from matplotlib.figure import Figure
from pydantic import BaseModel, ConfigDict, Field

from .config import TopologyConfig
from .errors import DatasetParseError, IntersectionMcmcError
from .ingest import load_dataset, load_document
from .lanes.mapio import LaneletMapDocument, TopologyDocument, model_from_records
from .models.lanelet import LaneletModel
from .models.topology import TopologyModel
from .synthetic import load_ground_truth
from .topology.rays import lane_table

logger = logging.getLogger("intersection_mcmc.render")

LAYERS = ("ground-truth", "trajectories", "detections", "topology", "lanelets")


class Scene(BaseModel):
    """Everything drawn into one SVG."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    detections: List[np.ndarray] = Field(default_factory=list)
    trajectories: List[np.ndarray] = Field(default_factory=list)
    lanelets: List[LaneletModel] = Field(default_factory=list)
    topologies: List[TopologyModel] = Field(default_factory=list)
    ground_truth: List[LaneletModel] = Field(default_factory=list)


def _document_kind(path: Path) -> str:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise IntersectionMcmcError(f"Cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise DatasetParseError(str(path), f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise DatasetParseError(str(path), "expected a JSON object")
    if "topology" in data and "connections" in data:
        return "ground-truth"
    if "topology" in data:
        return "topology"
    if "lanelets" in data:
        return "lanelets"
    if "detections" in data or "trajectories" in data:
        return "dataset"
    raise DatasetParseError(str(path), "not a dataset, topology, lanelet map or ground-truth document")


def load_scene(paths: Sequence[Path]) -> Scene:
    """Collect the layers of all given documents.

    Raises:
        DatasetParseError: If a document is malformed or of unknown kind
    """
    scene = Scene()
    for path in paths:
        kind = _document_kind(path)
        if kind == "dataset":
            dataset = load_dataset(path)
            if dataset.detections:
                scene.detections.append(np.array([[d.x, d.y] for d in dataset.detections]))
            scene.trajectories.extend(t.xy() for t in dataset.trajectories)
        elif kind == "ground-truth":
            scene.ground_truth.append(load_ground_truth(path).lanelets)
        elif kind == "topology":
            scene.topologies.append(load_document(path, TopologyDocument).topology)
        else:
            document = load_document(path, LaneletMapDocument)
            scene.lanelets.append(model_from_records(document.lanelets, document.assignments))
        logger.debug(f"Loaded {kind} layer from {path}")
    return scene


def _border_segments(models: Iterable[LaneletModel]) -> List[np.ndarray]:
    return [border for model in models for lanelet in model.lanelets.values() for border in (lanelet.left, lanelet.right)]


def _center_segments(models: Iterable[LaneletModel]) -> List[np.ndarray]:
    return [line.points for model in models for line in model.center_lines.values()]


def _ray_segments(topologies: Iterable[TopologyModel], cfg: TopologyConfig) -> List[np.ndarray]:
    segments = []
    for topology in topologies:
        table = lane_table(topology, cfg)
        segments.extend(np.vstack([s, e]) for s, e in zip(table.starts, table.ends))
    return segments


def render_svg(scene: Scene, path: Path, cfg: Optional[TopologyConfig] = None) -> Path:
    """Draw the scene; identical scenes give identical bytes."""
    cfg = cfg or TopologyConfig()
    with matplotlib.rc_context({"svg.hashsalt": "intersection-mcmc", "svg.fonttype": "none"}):
        figure = Figure(figsize=(8, 8))
        FigureCanvasSVG(figure)
        ax = figure.add_subplot(1, 1, 1)
        ax.set_aspect("equal")
        ax.set_axis_off()

        layers = {
            "ground-truth": LineCollection(
                _border_segments(scene.ground_truth) + _center_segments(scene.ground_truth),
                colors="#9e9e9e", linewidths=0.6, linestyles="dashed",
            ),
            "trajectories": LineCollection(scene.trajectories, colors="#1f77b4", linewidths=0.5, alpha=0.6),
            "topology": LineCollection(_ray_segments(scene.topologies, cfg), colors="#2ca02c", linewidths=0.8),
            "lanelets": LineCollection(_border_segments(scene.lanelets), colors="#d62728", linewidths=0.8),
        }
        for name in LAYERS:
            if name == "detections":
                points = np.vstack(scene.detections) if scene.detections else np.zeros((0, 2))
                artist = ax.scatter(points[:, 0], points[:, 1], s=2.0, c="#ff7f0e", linewidths=0)
            else:
                artist = ax.add_collection(layers[name])
            artist.set_gid(name)
        centers = LineCollection(_center_segments(scene.lanelets), colors="#d62728", linewidths=0.4, linestyles="dotted")
        centers.set_gid("lanelet-centers")
        ax.add_collection(centers)
        ax.autoscale_view()

        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            figure.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise IntersectionMcmcError(f"Cannot write {path}: {e}") from e
    logger.info(f"Rendered {path}")
    return path

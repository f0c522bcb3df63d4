"""
Posterior of the stage-2 lane-course model.

The prior rewards shared border points and smooth center lines; the
likelihood scores every trajectory point by its distance to the closest
center line on the trajectory's assigned lanelet path.
"""

import math
from typing import Any, Dict, Hashable, Iterable, List, Optional, Sequence

import numpy as np
from scipy.stats import norm

from ..config import LaneCourseConfig
from ..errors import EstimationError
from ..geometry import polyline_distances
from ..models.lanelet import CenterLine, LaneletModel
from ..models.measurement import Trajectory


def smoothness_delta(center_line: CenterLine) -> float:
    """Sum of turning angles between consecutive center-line segments."""
    points = center_line.points
    if len(points) < 3:
        return 0.0
    steps = np.diff(points, axis=0)
    lengths = np.linalg.norm(steps, axis=1)
    steps = steps[lengths > 1e-12] / lengths[lengths > 1e-12, None]
    if len(steps) < 2:
        return 0.0
    cosines = np.clip(np.einsum("ij,ij->i", steps[:-1], steps[1:]), -1.0, 1.0)
    return float(np.arccos(cosines).sum())


def _smoothness_term(center_line: CenterLine, cfg: LaneCourseConfig) -> float:
    return float(norm.logpdf(smoothness_delta(center_line), loc=0.0, scale=cfg.sigma_smooth))


def _sharing_term(model: LaneletModel, cfg: LaneCourseConfig) -> float:
    return cfg.tau * math.log(1.0 + model.shared_pair_count)


def log_prior_course(model: LaneletModel, cfg: LaneCourseConfig) -> float:
    """τ·ln(1 + shared pairs) plus the smoothness log-density of every center line."""
    return _sharing_term(model, cfg) + sum(_smoothness_term(model.center_lines[lid], cfg) for lid in model.lanelets)


def _path_of(trajectory: Trajectory, model: LaneletModel) -> List[str]:
    path = model.assignments.get(trajectory.id)
    if not path:
        raise EstimationError(f"Trajectory {trajectory.id} has no lanelet assignment")
    return path


def _point_log_likelihood(distances: Sequence[np.ndarray], cfg: LaneCourseConfig) -> float:
    nearest = np.min(np.vstack(distances), axis=0)
    return float(norm.logpdf(nearest, loc=0.0, scale=cfg.sigma_perp).sum())


def log_likelihood_trajectory(trajectory: Trajectory, model: LaneletModel, cfg: LaneCourseConfig) -> float:
    """Σ over points of ln N(d; 0, σ⊥), d = distance to the nearest center line on the path.

    Raises:
        EstimationError: If the trajectory has no assignment in the model
    """
    xy = trajectory.xy()
    distances = [polyline_distances(xy, model.center_lines[lid].points) for lid in _path_of(trajectory, model)]
    return _point_log_likelihood(distances, cfg)


def scorable(trajectories: Iterable[Trajectory], model: LaneletModel) -> List[Trajectory]:
    """Trajectories with points and a lanelet path in the model."""
    return [t for t in trajectories if len(t.points) and model.assignments.get(t.id)]


def log_posterior_course(model: LaneletModel, trajectories: Sequence[Trajectory], cfg: LaneCourseConfig) -> float:
    """Full recomputation of ln P(I_2 | T) over the assigned trajectories."""
    total = log_prior_course(model, cfg)
    for trajectory in scorable(trajectories, model):
        total += log_likelihood_trajectory(trajectory, model, cfg)
    return total


class _RevisionCache:
    """Values per key for the two most recent revisions (current state and proposal)."""

    def __init__(self, depth: int = 2):
        self.depth = depth
        self._store: Dict[Hashable, Dict[Hashable, Any]] = {}

    def get(self, key: Hashable, revision: Hashable) -> Optional[Any]:
        return self._store.get(key, {}).get(revision)

    def put(self, key: Hashable, revision: Hashable, value: Any) -> Any:
        slot = self._store.setdefault(key, {})
        slot[revision] = value
        while len(slot) > self.depth:
            slot.pop(next(iter(slot)))
        return value


class CourseScorer:
    """Posterior evaluator that recomputes only terms of changed lanelets.

    Smoothness terms are cached per (lanelet, revision) and point distances per
    (trajectory, lanelet, revision). Every lanelet edit bumps the revision, so
    results equal a full recomputation with log_posterior_course.
    """

    def __init__(self, trajectories: Sequence[Trajectory], cfg: LaneCourseConfig):
        self.cfg = cfg
        self.trajectories = list(trajectories)
        self._smooth = _RevisionCache()
        self._distances = _RevisionCache()
        self._trajectory_terms = _RevisionCache()
        self._points = {t.id: t.xy() for t in self.trajectories}
        self.hits = 0
        self.misses = 0

    def _smoothness(self, model: LaneletModel, lid: str) -> float:
        revision = model.lanelets[lid].revision
        value = self._smooth.get(lid, revision)
        if value is None:
            value = self._smooth.put(lid, revision, _smoothness_term(model.center_lines[lid], self.cfg))
        return value

    def _distance(self, model: LaneletModel, trajectory_id: str, lid: str) -> np.ndarray:
        revision = model.lanelets[lid].revision
        value = self._distances.get((trajectory_id, lid), revision)
        if value is None:
            value = self._distances.put(
                (trajectory_id, lid), revision,
                polyline_distances(self._points[trajectory_id], model.center_lines[lid].points),
            )
        return value

    def _trajectory(self, model: LaneletModel, trajectory: Trajectory) -> float:
        path = _path_of(trajectory, model)
        revisions = tuple(model.lanelets[lid].revision for lid in path)
        value = self._trajectory_terms.get(trajectory.id, revisions)
        if value is not None:
            self.hits += 1
            return value
        self.misses += 1
        distances = [self._distance(model, trajectory.id, lid) for lid in path]
        return self._trajectory_terms.put(trajectory.id, revisions, _point_log_likelihood(distances, self.cfg))

    def __call__(self, model: LaneletModel) -> float:
        total = _sharing_term(model, self.cfg) + sum(self._smoothness(model, lid) for lid in model.lanelets)
        for trajectory in scorable(self.trajectories, model):
            total += self._trajectory(model, trajectory)
        return total

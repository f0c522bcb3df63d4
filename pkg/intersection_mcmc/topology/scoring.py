"""
Prior and likelihood of the stage-1 topology model.

The likelihood of a measurement marginalizes over every lane whose driving
direction matches the measurement's; the per-measurement value is floored so
clutter cannot drive the posterior to −∞.
"""

import math
import warnings
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import norm
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import HuberRegressor

from ..config import TopologyConfig
from ..ingest import classify_doppler
from ..models.measurement import Detection, TrackSummary
from ..models.topology import TopologyModel
from .rays import DIRECTION_CODES, lane_table

Measurement = Union[Detection, TrackSummary]

# Smallest/largest singular value ratio of the heading normals below which
# the headings do not pin down a crossing point.
MIN_HEADING_SPREAD = 0.05


class MeasurementBatch(BaseModel):
    """Measurements as arrays; class −1 means classify against the model center.

    weights holds the point count of track summaries and 1 for detections.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    positions: np.ndarray
    headings: np.ndarray
    codes: np.ndarray
    weights: np.ndarray
    oriented: np.ndarray

    def __len__(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def from_measurements(cls, measurements: Sequence[Measurement]) -> "MeasurementBatch":
        positions, headings, codes, weights = [], [], [], []
        for z in measurements:
            if isinstance(z, TrackSummary):
                positions.append(z.mean_position.as_array())
                headings.append(z.mean_direction.as_array())
                codes.append(DIRECTION_CODES[z.direction_class])
                weights.append(float(z.weight))
            else:
                positions.append([z.x, z.y])
                headings.append(z.heading.as_array() if z.heading is not None else [np.nan, np.nan])
                if z.direction_class is not None:
                    codes.append(DIRECTION_CODES[z.direction_class])
                elif z.heading is None:
                    codes.append(DIRECTION_CODES[classify_doppler(z.doppler)])
                else:
                    codes.append(-1)
                weights.append(1.0)
        headings_array = np.array(headings, dtype=float).reshape(-1, 2)
        return cls(
            positions=np.array(positions, dtype=float).reshape(-1, 2),
            headings=headings_array,
            codes=np.array(codes, dtype=int),
            weights=np.array(weights, dtype=float),
            oriented=~np.isnan(headings_array[:, 0]),
        )

    def centroid(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    def heading_crossing(self) -> Optional[np.ndarray]:
        """Point closest to the lines through all oriented measurements.

        Fitted with a Huber loss so a few curved or clutter headings do not
        drag it. None when the headings are (nearly) parallel or the crossing
        lies outside the measurements' extent.
        """
        if self.oriented.sum() < 2:
            return None
        h = self.headings[self.oriented]
        p = self.positions[self.oriented]
        normals = np.column_stack([-h[:, 1], h[:, 0]])
        singular = np.linalg.svd(normals, compute_uv=False)
        if singular[-1] < MIN_HEADING_SPREAD * singular[0]:
            return None
        offsets = np.einsum("mj,mj->m", normals, p)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            fit = HuberRegressor(fit_intercept=False, alpha=0.0, max_iter=500).fit(normals, offsets)
        crossing = fit.coef_
        reach = np.linalg.norm(self.positions - self.centroid(), axis=1).max()
        if not np.all(np.isfinite(crossing)) or np.linalg.norm(crossing - self.centroid()) > reach:
            return None
        return crossing


def log_prior_topology(model: TopologyModel, cfg: TopologyConfig) -> float:
    """ln P(|A|) + ln P(|L|); a count outside a prior's support scores the floor."""
    total = 0.0
    for count, prior in ((len(model.arms), cfg.arm_count_prior), (model.lane_count, cfg.lane_count_prior)):
        p = prior.get(count, 0.0)
        total += math.log(p) if p > 0.0 else cfg.likelihood_floor
    return total


@lru_cache(maxsize=32)
def _log_normalizer(sigma: float) -> float:
    return float(norm.logpdf(0.0, loc=0.0, scale=sigma))


def _squared_segment_distances(points: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """(m, L) squared distances of points to straight segments."""
    ab = ends - starts
    ab2 = np.einsum("lj,lj->l", ab, ab)
    ap = points[:, None, :] - starts[None, :, :]
    t = np.clip(np.einsum("mlj,lj->ml", ap, ab) / ab2[None, :], 0.0, 1.0)
    diff = ap - t[..., None] * ab[None, :, :]
    return np.einsum("mlj,mlj->ml", diff, diff)


def log_likelihoods(batch: MeasurementBatch, model: TopologyModel, cfg: TopologyConfig) -> np.ndarray:
    """Floored log-likelihood of every measurement in the batch.

    With summary_weighting "points" each value is multiplied by the
    measurement's point count.
    """
    if len(batch) == 0:
        return np.zeros(0)
    scale = batch.weights if cfg.summary_weighting == "points" else 1.0
    table = lane_table(model, cfg)
    if len(table) == 0:
        return scale * np.full(len(batch), cfg.likelihood_floor)

    codes = batch.codes
    unclassified = codes < 0
    if unclassified.any():
        toward = np.einsum("mj,mj->m", batch.headings, model.center.as_array()[None, :] - batch.positions) > 0.0
        codes = np.where(unclassified, np.where(toward, 0, 1), codes)

    # Gaussian log densities from the squared deviations
    sq = _squared_segment_distances(batch.positions, table.starts, table.ends)
    log_terms = _log_normalizer(cfg.sigma_perp) - 0.5 * sq / cfg.sigma_perp ** 2
    if batch.oriented.any():
        cosines = np.clip(batch.headings[batch.oriented] @ table.travel.T, -1.0, 1.0)
        angles = np.arccos(cosines)
        log_terms[batch.oriented] += _log_normalizer(cfg.sigma_ang) - 0.5 * (angles / cfg.sigma_ang) ** 2

    matches = codes[:, None] == table.codes[None, :]
    per_measurement = np.logaddexp.reduce(np.where(matches, log_terms, -np.inf), axis=1)
    return scale * np.maximum(per_measurement, cfg.likelihood_floor)


def log_likelihood_point(z: Measurement, model: TopologyModel, cfg: TopologyConfig) -> float:
    """Log-likelihood of one detection or track summary."""
    return float(log_likelihoods(MeasurementBatch.from_measurements([z]), model, cfg)[0])


def log_posterior_topology(model: TopologyModel, batch: MeasurementBatch, cfg: TopologyConfig) -> float:
    return log_prior_topology(model, cfg) + float(log_likelihoods(batch, model, cfg).sum())

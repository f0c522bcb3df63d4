"""
Configuration for intersection-mcmc.

Values resolve from defaults, then an optional JSON config document, then
environment variables (a `.env` file is honoured), then CLI overrides.
"""

import json
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .engine.sampler import AnnealingSchedule
from .errors import ConfigError

ENV_PREFIX = "INTERSECTION_MCMC_"


MAX_PRIOR_LANES = 48
LANE_PRIOR_DECAY = 0.6


def _default_lane_count_prior() -> Dict[int, float]:
    """Categorical over 2..48 lanes with mode 4 and a geometric tail.

    The support covers five arms of four lanes per direction with room to spare.
    """
    weights = {2: 0.5, 3: 0.8, 4: 1.0}
    weights.update({n: LANE_PRIOR_DECAY ** (n - 4) for n in range(5, MAX_PRIOR_LANES + 1)})
    total = sum(weights.values())
    return {n: w / total for n, w in weights.items()}


def _check_categorical(prior: Dict[int, float], name: str) -> Dict[int, float]:
    if not prior:
        raise ValueError(f"{name} must not be empty")
    if any(p < 0.0 for p in prior.values()):
        raise ValueError(f"{name} probabilities must be non-negative")
    if abs(sum(prior.values()) - 1.0) > 1e-6:
        raise ValueError(f"{name} must sum to 1")
    return prior


class TopologyConfig(BaseModel):
    """Hyperparameters of the stage-1 topology sampler."""
    sigma_perp: float = Field(1.0, gt=0.0, description="Lateral deviation σ⊥ in meters")
    sigma_ang: float = Field(math.radians(10.0), gt=0.0, description="Angular deviation σ∠ in radians")
    arm_count_prior: Dict[int, float] = Field(
        default_factory=lambda: {2: 0.15, 3: 0.35, 4: 0.35, 5: 0.15},
        description="P(|A|)",
    )
    lane_count_prior: Dict[int, float] = Field(default_factory=_default_lane_count_prior, description="P(|L|)")
    min_arm_angle: float = Field(math.radians(45.0), gt=0.0, description="Minimum angle between adjacent arms")
    lane_width_default: float = Field(3.5, gt=0.0, description="Fixed lane width w_l in meters")
    ray_length: float = Field(100.0, gt=0.0, description="Length of a stage-1 lane ray in meters")
    min_mouth_distance: float = Field(6.0, ge=0.0, description="Smallest distance of an arm mouth from the center")
    mouth_margin: float = Field(2.0, ge=0.0, description="Clearance added to the non-overlap mouth distance")
    n_samples: int = Field(5000, ge=0, description="Number of stage-1 samples")
    schedule: AnnealingSchedule = Field(default_factory=AnnealingSchedule)
    likelihood_floor: float = Field(math.log(1e-12), description="Per-measurement log-likelihood floor")
    summary_weighting: Literal["unit", "points"] = Field(
        "unit",
        description="'unit': one term per track summary; 'points': the term is raised to the summary's point count",
    )
    initial_center: Literal["heading_lines", "centroid"] = Field(
        "heading_lines",
        description="Start of the chain: least-squares crossing of the measurement headings, or the plain centroid",
    )
    time_budget: Optional[float] = Field(None, gt=0.0, description="Wall-clock limit of the chain in seconds")

    @field_validator("arm_count_prior")
    @classmethod
    def _arm_prior(cls, prior: Dict[int, float]) -> Dict[int, float]:
        return _check_categorical(prior, "arm_count_prior")

    @field_validator("lane_count_prior")
    @classmethod
    def _lane_prior(cls, prior: Dict[int, float]) -> Dict[int, float]:
        return _check_categorical(prior, "lane_count_prior")


class LaneCourseConfig(BaseModel):
    """Hyperparameters of the stage-2 lane-course sampler."""
    sigma_perp: float = Field(1.0, gt=0.0, description="Lateral deviation σ⊥ in meters")
    sigma_smooth: float = Field(0.5, gt=0.0, description="Deviation of the per-lane smoothness δ_l in radians")
    tau: float = Field(1.0, gt=0.0, description="Exponent τ of the sharing term")
    support_spacing: float = Field(2.0, gt=0.0, description="Distance between border support points in meters")
    split_max: float = Field(0.6, gt=0.0, description="Largest split displacement Δb in meters")
    move_sigma: float = Field(0.3, gt=0.0, description="Deviation of lateral center-point moves in meters")
    merge_radius: float = Field(1.0, gt=0.0, description="Largest distance of merge candidates in meters")
    lane_extent_quantile: float = Field(0.9, gt=0.0, le=1.0, description="Quantile of along-arm data extent used as lane length")
    min_lane_length: float = Field(10.0, gt=0.0, description="Shortest lane lanelet in meters")
    n_samples: int = Field(20000, ge=0, description="Number of stage-2 samples")
    schedule: AnnealingSchedule = Field(default_factory=AnnealingSchedule)
    time_budget: Optional[float] = Field(None, gt=0.0, description="Wall-clock limit of the chain in seconds")


class GenerationParams(BaseModel):
    """Ranges of the synthetic intersection generator."""
    arm_counts: List[int] = Field(default_factory=lambda: [3, 4, 5])
    lanes_per_direction: List[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    min_angle: float = Field(math.radians(45.0), gt=0.0, description="Minimum angle between adjacent arms")
    max_gap: float = Field(3.0, gt=0.0, description="Gaps are drawn from [0, max_gap)")
    lane_width: float = Field(3.5, gt=0.0)
    arm_length: float = Field(60.0, gt=0.0, description="Length of ground-truth lanes outside the intersection")
    max_per_lane: int = Field(6, ge=1, description="Most routes starting on one entering lane")
    step: float = Field(2.0, gt=0.0, description="Distance between simulated trajectory points")
    speed: float = Field(10.0, gt=0.0, description="Simulated speed in m/s")
    noise_sigma: float = Field(1.0, ge=0.0, description="Per-axis detection noise in meters")
    clutter_count: int = Field(20, ge=0, description="False detections per intersection")
    clutter_radius: float = Field(80.0, gt=0.0)
    max_retries: int = Field(1000, ge=1, description="Rejection-sampling attempts for arm headings")
    count: int = Field(1000, ge=1, description="Intersections per generated suite")
    seed: int = Field(0, description="Seed of the suite; per-intersection seeds derive from it")

    @field_validator("arm_counts", "lanes_per_direction")
    @classmethod
    def _non_empty(cls, values: List[int]) -> List[int]:
        if not values or min(values) < 1:
            raise ValueError("ranges must be non-empty positive integers")
        return values

    @model_validator(mode="after")
    def _feasible(self) -> "GenerationParams":
        if max(self.arm_counts) * self.min_angle > 2.0 * math.pi + 1e-9:
            raise ValueError("arm count and min_angle cannot be satisfied together")
        return self


class IngestConfig(BaseModel):
    """Preprocessing of raw detections."""
    voxel_cell: float = Field(1.0, gt=0.0, description="Voxel cell size in meters")
    doppler_threshold: float = Field(0.5, ge=0.0, description="Static detections below this |v| are dropped")


class RunConfig(BaseModel):
    """Everything a CLI run needs, embedded in every artifact it writes."""
    topology: TopologyConfig = Field(default_factory=TopologyConfig)
    lane_course: LaneCourseConfig = Field(default_factory=LaneCourseConfig)
    generation: GenerationParams = Field(default_factory=GenerationParams)
    ingest: IngestConfig = Field(default_factory=IngestConfig)
    seed: int = Field(0, description="Master seed")
    parallelism: int = Field(1, ge=1, description="Worker processes of a benchmark run")
    input_mode: Literal["tracked", "detections"] = "tracked"
    seed_center: Optional[List[float]] = Field(None, description="Split center (x, y) for real data")

    def resolved(self) -> Dict[str, Any]:
        """JSON-ready dump of the full configuration."""
        return self.model_dump(mode="json")


def _env_overrides() -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    mapping = {
        "SEED": ("seed",),
        "PARALLELISM": ("parallelism",),
        "STAGE1_SAMPLES": ("topology", "n_samples"),
        "STAGE2_SAMPLES": ("lane_course", "n_samples"),
        "INPUT_MODE": ("input_mode",),
    }
    for suffix, path in mapping.items():
        value = os.environ.get(ENV_PREFIX + suffix)
        if value is not None:
            target = overrides
            for key in path[:-1]:
                target = target.setdefault(key, {})
            target[path[-1]] = value
    return overrides


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Load configuration from a JSON document, the environment and overrides.

    Args:
        path: Optional JSON config document; nested keys mirror RunConfig
        overrides: Nested dictionary applied last (CLI flags)

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: If the document cannot be read or a value is invalid
    """
    load_dotenv()
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as e:
            raise ConfigError(f"Cannot read config file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    data = _merge(data, _env_overrides())
    data = _merge(data, overrides or {})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"Invalid config value at '{location}': {first['msg']}") from e

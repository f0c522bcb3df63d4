"""
Evaluation report models.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class TopologyReport(BaseModel):
    """Stage-1 result compared against ground truth."""
    arm_count_correct: bool
    lane_level_correct: bool
    center_error: float = Field(..., ge=0.0, description="Center distance in meters")
    mean_angle_error: float = Field(..., ge=0.0, description="Mean heading error of matched arms in radians")
    center_offset: List[float] = Field(default_factory=lambda: [0.0, 0.0], description="Estimated minus true center (dx, dy)")


class LaneCourseReport(BaseModel):
    """Stage-2 center-line deviations of the correctly estimated lanes."""
    per_lane_deviation: Dict[str, float] = Field(default_factory=dict)
    mean_deviation: Optional[float] = Field(None, description="Average of per-lane values; None if no lane was evaluated")
    coverage: float = Field(0.0, ge=0.0, le=1.0, description="Share of ground-truth lanes evaluated")


class IntersectionRow(BaseModel):
    """One benchmark row: one intersection at one sample count."""
    name: str
    seed: int
    category: Optional[str] = None
    stage1_samples: int
    stage2_samples: int
    topology: Optional[TopologyReport] = None
    lane_course: Optional[LaneCourseReport] = None
    stage1_seconds: float = 0.0
    stage2_seconds: float = 0.0
    error: Optional[str] = None


class RuntimeFit(BaseModel):
    """Least-squares line of wall-clock against sample count."""
    slope: float
    intercept: float
    r2: float


class SuiteSummary(BaseModel):
    """Aggregated metrics over a suite of intersections."""
    count: int
    failures: int
    arm_accuracy: float = Field(..., description="Percent of correct arm counts")
    lane_level_accuracy: float = Field(..., description="Percent of correct lane-level topologies")
    center_error_mean: Optional[float] = None
    center_error_median: Optional[float] = None
    center_error_p90: Optional[float] = None
    center_error_p95: Optional[float] = None
    center_error_variance: Optional[float] = None
    angle_error_mean: Optional[float] = Field(None, description="Mean absolute arm heading error in degrees")
    lane_deviation_mean: Optional[float] = None
    lane_coverage_mean: Optional[float] = None
    center_scatter: List[List[float]] = Field(default_factory=list)
    curves: Dict[str, List[Dict[str, Any]]] = Field(default_factory=dict)
    runtime_fits: Dict[str, RuntimeFit] = Field(default_factory=dict)
    categories: Dict[str, Dict[str, Optional[float]]] = Field(default_factory=dict)


__all__ = ["TopologyReport", "LaneCourseReport", "IntersectionRow", "RuntimeFit", "SuiteSummary"]

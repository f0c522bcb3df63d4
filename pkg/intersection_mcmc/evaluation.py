"""
Metrics of estimated intersections against ground truth, and suite aggregation.
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from .geometry import angular_difference, polyline_distances
from .lanes.preprocess import connection_id, lanelet_id
from .models.lanelet import CenterLine, LaneletModel
from .models.measurement import DirectionClass
from .models.report import IntersectionRow, LaneCourseReport, RuntimeFit, SuiteSummary, TopologyReport
from .models.topology import TopologyModel

logger = logging.getLogger("intersection_mcmc.evaluation")

LineLike = Union[CenterLine, np.ndarray]


def match_arms(est: TopologyModel, gt: TopologyModel) -> Dict[int, int]:
    """Greedy arm correspondence by smallest heading difference.

    Returns:
        Mapping of estimated arm index to ground-truth arm index; surplus arms
        on either side stay unmatched
    """
    pairs = sorted(
        (angular_difference(a.heading, b.heading), i, j)
        for i, a in enumerate(est.arms)
        for j, b in enumerate(gt.arms)
    )
    matching: Dict[int, int] = {}
    taken = set()
    for _, i, j in pairs:
        if i not in matching and j not in taken:
            matching[i] = j
            taken.add(j)
    return dict(sorted(matching.items()))


def topology_report(est: TopologyModel, gt: TopologyModel) -> TopologyReport:
    matching = match_arms(est, gt)
    arm_count_correct = len(est.arms) == len(gt.arms)
    lane_level_correct = arm_count_correct and all(
        len(est.arms[i].lanes_in) == len(gt.arms[j].lanes_in) and len(est.arms[i].lanes_out) == len(gt.arms[j].lanes_out)
        for i, j in matching.items()
    )
    errors = [angular_difference(est.arms[i].heading, gt.arms[j].heading) for i, j in matching.items()]
    offset = est.center.as_array() - gt.center.as_array()
    return TopologyReport(
        arm_count_correct=arm_count_correct,
        lane_level_correct=lane_level_correct,
        center_error=float(np.hypot(*offset)),
        mean_angle_error=float(np.mean(errors)) if errors else 0.0,
        center_offset=offset.tolist(),
    )


def _points(line: LineLike) -> np.ndarray:
    return line.points if isinstance(line, CenterLine) else np.asarray(line, dtype=float)


def center_line_deviation(est_line: LineLike, gt_line: LineLike) -> float:
    """Mean distance of the estimated center-line points to the ground-truth line (not symmetric)."""
    return float(polyline_distances(_points(est_line), _points(gt_line)).mean())


def lane_course_report(
    est: LaneletModel,
    est_topology: TopologyModel,
    gt: LaneletModel,
    gt_topology: TopologyModel,
) -> LaneCourseReport:
    """Center-line deviation of every correctly estimated lane and connection.

    A lane is correctly estimated when its arm is matched and the matched arms
    agree on the lane count in its direction. Connections count when both of
    their lanes do. Keys are ground-truth lanelet ids.
    """
    matching = match_arms(est_topology, gt_topology)
    lane_map: Dict[str, str] = {}
    for i, j in matching.items():
        for direction in (DirectionClass.ENTERING, DirectionClass.LEAVING):
            est_lanes, gt_lanes = est_topology.arms[i].lanes(direction), gt_topology.arms[j].lanes(direction)
            if len(est_lanes) != len(gt_lanes):
                continue
            for k in range(len(est_lanes)):
                lane_map[lanelet_id((i, direction, k))] = lanelet_id((j, direction, k))

    deviations: Dict[str, float] = {}
    for est_id, gt_id in lane_map.items():
        if est_id in est.lanelets and gt_id in gt.lanelets:
            deviations[gt_id] = center_line_deviation(est.center_lines[est_id], gt.center_lines[gt_id])
    for lanelet in est.lanelets.values():
        if lanelet.kind != "connection" or not lanelet.connects:
            continue
        entering, leaving = lanelet.connects
        if entering in lane_map and leaving in lane_map:
            gt_id = connection_id(lane_map[entering], lane_map[leaving])
            if gt_id in gt.lanelets:
                deviations[gt_id] = center_line_deviation(est.center_lines[lanelet.id], gt.center_lines[gt_id])

    gt_lanes = [lid for lid, l in gt.lanelets.items() if l.kind == "lane"]
    evaluated = sum(1 for lid in gt_lanes if lid in deviations)
    return LaneCourseReport(
        per_lane_deviation=dict(sorted(deviations.items())),
        mean_deviation=float(np.mean(list(deviations.values()))) if deviations else None,
        coverage=evaluated / len(gt_lanes) if gt_lanes else 0.0,
    )


def fit_runtime(samples: Sequence[float], seconds: Sequence[float]) -> Optional[RuntimeFit]:
    """Least-squares line of runtime against sample count; None with fewer than two sample counts."""
    x = np.asarray(samples, dtype=float).reshape(-1, 1)
    y = np.asarray(seconds, dtype=float)
    if len(np.unique(x)) < 2:
        return None
    regression = LinearRegression().fit(x, y)
    return RuntimeFit(
        slope=float(regression.coef_[0]),
        intercept=float(regression.intercept_),
        r2=float(r2_score(y, regression.predict(x))),
    )


def _mean(values: Iterable[float]) -> Optional[float]:
    values = list(values)
    return float(np.mean(values)) if values else None


def _percent(flags: List[bool], total: int) -> float:
    return 100.0 * sum(flags) / total if total else 0.0


def _core(rows: List[IntersectionRow]) -> dict:
    scored = [r for r in rows if r.topology is not None]
    centers = np.array([r.topology.center_error for r in scored])
    lane_rows = [r.lane_course for r in rows if r.lane_course is not None]
    return {
        "count": len(rows),
        "failures": sum(1 for r in rows if r.error is not None or r.topology is None),
        "arm_accuracy": _percent([r.topology.arm_count_correct for r in scored], len(rows)),
        "lane_level_accuracy": _percent([r.topology.lane_level_correct for r in scored], len(rows)),
        "center_error_mean": float(centers.mean()) if len(centers) else None,
        "center_error_median": float(np.median(centers)) if len(centers) else None,
        "center_error_p90": float(np.percentile(centers, 90)) if len(centers) else None,
        "center_error_p95": float(np.percentile(centers, 95)) if len(centers) else None,
        "center_error_variance": float(centers.var()) if len(centers) else None,
        "angle_error_mean": _mean(math.degrees(r.topology.mean_angle_error) for r in scored),
        "lane_deviation_mean": _mean(lc.mean_deviation for lc in lane_rows if lc.mean_deviation is not None),
        "lane_coverage_mean": _mean(lc.coverage for lc in lane_rows),
        "center_scatter": [list(r.topology.center_offset) for r in scored],
    }


def aggregate(rows: Sequence[IntersectionRow]) -> SuiteSummary:
    """Suite summary over benchmark rows; failed rows count as incorrect.

    Raises:
        ValueError: If there are no rows
    """
    rows = list(rows)
    if not rows:
        raise ValueError("Cannot aggregate an empty suite")
    categories = {}
    for category in sorted({r.category for r in rows if r.category}):
        core = _core([r for r in rows if r.category == category])
        categories[category] = {
            key: core[key]
            for key in ("count", "arm_accuracy", "lane_level_accuracy", "center_error_mean", "angle_error_mean", "lane_deviation_mean")
        }
    return SuiteSummary(**_core(rows), categories=categories)


def sample_curves(rows: Sequence[IntersectionRow]) -> Dict[str, List[dict]]:
    """Accuracy and runtime per stage-1 and per stage-2 sample count."""
    curves: Dict[str, List[dict]] = {"stage1": [], "stage2": []}
    for samples in sorted({r.stage1_samples for r in rows}):
        core = _core([r for r in rows if r.stage1_samples == samples])
        curves["stage1"].append({
            "samples": samples,
            "arm_accuracy": core["arm_accuracy"],
            "lane_level_accuracy": core["lane_level_accuracy"],
            "center_error_mean": core["center_error_mean"],
            "angle_error_mean": core["angle_error_mean"],
            "seconds_mean": _mean(r.stage1_seconds for r in rows if r.stage1_samples == samples and r.error is None),
        })
    for samples in sorted({r.stage2_samples for r in rows}):
        core = _core([r for r in rows if r.stage2_samples == samples])
        curves["stage2"].append({
            "samples": samples,
            "lane_deviation_mean": core["lane_deviation_mean"],
            "seconds_mean": _mean(r.stage2_seconds for r in rows if r.stage2_samples == samples and r.error is None),
        })
    return curves


def summarize_suite(rows: Sequence[IntersectionRow]) -> SuiteSummary:
    """Summary of the largest sample setting, with curves and runtime fits over all settings."""
    rows = list(rows)
    if not rows:
        raise ValueError("Cannot summarize an empty suite")
    final = max((r.stage1_samples, r.stage2_samples) for r in rows)
    summary = aggregate([r for r in rows if (r.stage1_samples, r.stage2_samples) == final])
    fits = {}
    ok = [r for r in rows if r.error is None]
    for stage in ("stage1", "stage2"):
        fit = fit_runtime([getattr(r, f"{stage}_samples") for r in ok], [getattr(r, f"{stage}_seconds") for r in ok])
        if fit is not None:
            fits[stage] = fit
    summary = summary.model_copy(update={"curves": sample_curves(rows), "runtime_fits": fits})
    logger.info(
        f"Suite of {summary.count} intersections: arm accuracy {summary.arm_accuracy:.2f}%, "
        f"lane-level accuracy {summary.lane_level_accuracy:.2f}%, failures {summary.failures}"
    )
    return summary

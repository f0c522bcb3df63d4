"""
Accuracy and runtime of both stages on a seeded synthetic suite.
"""

import math
import time

import numpy as np
import pytest

from intersection_mcmc.config import GenerationParams, RunConfig
from intersection_mcmc.evaluation import fit_runtime, lane_course_report, topology_report
from intersection_mcmc.ingest import split_center
from intersection_mcmc.lanes import estimate_lane_course
from intersection_mcmc.pipeline import measurements_for
from intersection_mcmc.synthetic import generate_suite
from intersection_mcmc.topology import estimate_topology

pytestmark = pytest.mark.slow

SWEEP = [2500, 5000, 10000, 20000]


@pytest.fixture(scope="module")
def suite():
    return generate_suite(GenerationParams(count=100, seed=123))


def _config(stage1: int = 5000, stage2: int = 20000, input_mode: str = "tracked") -> RunConfig:
    cfg = RunConfig(input_mode=input_mode)
    return cfg.model_copy(update={
        "topology": cfg.topology.model_copy(update={"n_samples": stage1}),
        "lane_course": cfg.lane_course.model_copy(update={"n_samples": stage2}),
    })


def _topology_reports(suite, cfg: RunConfig):
    reports, results = [], []
    for gt, dataset, seed in suite:
        result = estimate_topology(measurements_for(dataset, cfg), cfg.topology, seed)
        reports.append(topology_report(result.best_state, gt.topology))
        results.append(result)
    return reports, results


def _angle_error_deg(reports) -> float:
    return math.degrees(np.mean([r.mean_angle_error for r in reports]))


@pytest.fixture(scope="module")
def tracked(suite):
    return _topology_reports(suite, _config())


def test_tracked_topology_accuracy(tracked):
    reports, _ = tracked
    assert np.mean([r.arm_count_correct for r in reports]) >= 0.97
    assert np.mean([r.lane_level_correct for r in reports]) >= 0.85
    assert _angle_error_deg(reports) <= 1.5


def test_tracked_suite_runs_within_two_minutes(suite):
    cfg = _config()
    started = time.perf_counter()
    for _, dataset, seed in suite:
        estimate_topology(measurements_for(dataset, cfg), cfg.topology, seed)
    assert time.perf_counter() - started < 120.0


def test_detection_topology_accuracy(suite):
    reports, _ = _topology_reports(suite, _config(input_mode="detections"))
    assert np.mean([r.lane_level_correct for r in reports]) >= 0.75
    assert _angle_error_deg(reports) <= 2.5


def test_lane_course_deviation(suite, tracked):
    cfg = _config()
    _, results = tracked
    deviations = []
    for (gt, dataset, seed), topology in zip(suite, results):
        course = estimate_lane_course(
            topology.best_state,
            dataset.trajectories,
            cfg.topology,
            cfg.lane_course,
            seed,
            center=split_center(dataset),
        )
        report = lane_course_report(course.best_state, topology.best_state, gt.lanelets, gt.topology)
        if report.mean_deviation is not None:
            deviations.append(report.mean_deviation)
    assert deviations
    assert np.mean(deviations) <= 0.25


def test_center_error_shrinks_with_samples(suite):
    errors = {}
    for samples in (2500, 20000):
        reports, _ = _topology_reports(suite, _config(stage1=samples))
        errors[samples] = np.mean([r.center_error for r in reports])
    assert errors[20000] <= 0.5 * errors[2500]


def test_runtime_grows_linearly_with_samples(suite):
    """Test that both stages take time proportional to their sample counts."""
    _, dataset, seed = suite[0]
    stage1, stage2 = [], []
    for samples in SWEEP:
        cfg = _config(stage1=samples, stage2=samples)
        measurements = measurements_for(dataset, cfg)
        started = time.perf_counter()
        topology = estimate_topology(measurements, cfg.topology, seed)
        stage1.append(time.perf_counter() - started)
        started = time.perf_counter()
        estimate_lane_course(
            topology.best_state, dataset.trajectories, cfg.topology, cfg.lane_course, seed, center=split_center(dataset)
        )
        stage2.append(time.perf_counter() - started)
    assert fit_runtime(SWEEP, stage1).r2 >= 0.95
    assert fit_runtime(SWEEP, stage2).r2 >= 0.95

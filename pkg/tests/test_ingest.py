"""
Tests for measurement preprocessing and dataset documents.
"""

import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from intersection_mcmc.config import IngestConfig
from intersection_mcmc.errors import DatasetParseError, IntersectionMcmcError
from intersection_mcmc.geometry import Point2
from intersection_mcmc.ingest import (
    classify_detections,
    classify_doppler,
    filter_static,
    load_dataset,
    prepare_detections,
    reduce_track,
    split_center,
    split_trajectory,
    summarize_trajectories,
    voxelize,
)
from intersection_mcmc.models.measurement import Dataset, Detection, DirectionClass


@pytest.mark.parametrize(
    "doppler, expected",
    [(1.0, DirectionClass.LEAVING), (0.0, DirectionClass.ENTERING), (-3.2, DirectionClass.ENTERING)],
)
def test_classify_doppler(doppler, expected):
    assert classify_doppler(doppler) == expected


def test_filter_static_keeps_unmeasured_doppler():
    detections = [
        Detection(x=0.0, y=0.0, doppler=0.1),
        Detection(x=1.0, y=0.0, doppler=-2.0),
        Detection(x=2.0, y=0.0, dir="entering"),
    ]
    kept = filter_static(detections, threshold=0.5)
    assert [d.x for d in kept] == [1.0, 2.0]


def test_voxelize_merges_one_cell():
    """Test that two same-class detections in a cell become their midpoint."""
    merged = voxelize([
        Detection(x=0.2, y=0.2, dir="entering"),
        Detection(x=0.6, y=0.4, dir="entering"),
    ], cell=1.0)
    assert len(merged) == 1
    assert merged[0].x == pytest.approx(0.4)
    assert merged[0].y == pytest.approx(0.3)
    assert merged[0].direction_class == DirectionClass.ENTERING


def test_voxelize_keeps_classes_apart():
    merged = voxelize([
        Detection(x=0.2, y=0.2, dir="entering"),
        Detection(x=0.6, y=0.4, dir="leaving"),
    ], cell=1.0)
    assert len(merged) == 2


def test_voxelize_empty():
    assert voxelize([], cell=1.0) == []


def test_voxelize_large_cell_gives_sample_mean():
    rng = np.random.default_rng(0)
    xy = rng.uniform(0.0, 10.0, size=(100, 2))
    merged = voxelize([Detection(x=x, y=y, dir="leaving") for x, y in xy.tolist()], cell=10.0)
    assert len(merged) == 1
    assert merged[0].x == pytest.approx(xy[:, 0].mean())
    assert merged[0].y == pytest.approx(xy[:, 1].mean())


def test_voxelize_averages_headings():
    merged = voxelize([
        Detection(x=0.1, y=0.1, heading=[math.cos(math.radians(10.0)), math.sin(math.radians(10.0))]),
        Detection(x=0.3, y=0.1, heading=[math.cos(math.radians(80.0)), math.sin(math.radians(80.0))]),
    ], cell=1.0)
    assert len(merged) == 1
    assert merged[0].heading.angle == pytest.approx(math.pi / 4.0)


def test_voxelize_keeps_opposing_headings_apart():
    """Test that opposite orientations in one cell are never averaged."""
    merged = voxelize([
        Detection(x=0.2, y=0.2, heading=[1.0, 0.0]),
        Detection(x=0.6, y=0.4, heading=[-1.0, 0.0]),
    ], cell=1.0)
    assert sorted(d.heading.angle for d in merged) == pytest.approx([0.0, math.pi])


def test_voxelize_splits_oriented_detections_by_class():
    """Test that headings toward and away from the center land in separate groups."""
    toward = [math.cos(math.radians(170.0)), math.sin(math.radians(170.0))]
    away = [math.cos(math.radians(100.0)), math.sin(math.radians(100.0))]
    merged = voxelize([
        Detection(x=10.2, y=0.2, heading=toward),
        Detection(x=10.4, y=0.3, heading=toward),
        Detection(x=10.6, y=0.4, heading=away),
    ], cell=1.0, center=Point2(x=0.0, y=0.0))
    assert len(merged) == 2


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_voxelize_is_idempotent(seed):
    rng = np.random.default_rng(seed)
    detections = []
    for x, y, angle, kind in zip(rng.uniform(-20, 20, 300), rng.uniform(-20, 20, 300),
                                 rng.uniform(0, 2 * math.pi, 300), rng.integers(3, size=300)):
        if kind == 0:
            detections.append(Detection(x=x, y=y, heading=[math.cos(angle), math.sin(angle)]))
        elif kind == 1:
            detections.append(Detection(x=x, y=y, dir="entering"))
        else:
            detections.append(Detection(x=x, y=y, doppler=float(rng.normal(0.0, 5.0))))
    center = Point2(x=1.0, y=-2.0)
    once = voxelize(classify_detections(detections), cell=4.0, center=center)
    twice = voxelize(once, cell=4.0, center=center)
    assert len(once) < len(detections)
    assert once == twice


def test_prepare_detections_with_opposing_headings():
    prepared = prepare_detections(
        [Detection(x=0.2, y=0.2, heading=[1.0, 0.0]), Detection(x=0.6, y=0.4, heading=[-1.0, 0.0])],
        IngestConfig(),
        center=Point2(x=0.5, y=20.0),
    )
    assert len(prepared) == 2


def test_prepare_detections_classifies_doppler():
    prepared = prepare_detections(
        [Detection(x=0.5, y=0.5, doppler=3.0), Detection(x=5.5, y=5.5, doppler=-3.0), Detection(x=9.5, y=0.5, doppler=0.0)],
        IngestConfig(),
    )
    assert sorted(d.direction_class.value for d in prepared) == ["entering", "leaving"]


def test_split_symmetric_trajectory(trajectory_factory):
    """Test that 11 points through the center split into 6 and 5."""
    trajectory = trajectory_factory("t", [(x, 0.0) for x in range(-5, 6)])
    incoming, outgoing = split_trajectory(trajectory, Point2(x=0.0, y=0.0))
    assert len(incoming) == 6
    assert len(outgoing) == 5
    assert incoming.points[-1].x == 0.0


def test_split_trajectory_ending_at_center(trajectory_factory):
    trajectory = trajectory_factory("t", [(x, 0.0) for x in range(10, -1, -1)])
    incoming, outgoing = split_trajectory(trajectory, Point2(x=0.0, y=0.0))
    assert len(incoming) == 11
    assert len(outgoing) == 0


def test_split_curved_trajectory_at_closest_point(trajectory_factory):
    theta = np.linspace(0.0, math.pi, 50)
    xy = np.column_stack([20.0 * np.cos(theta), 20.0 * np.sin(theta)])
    center = Point2(x=6.0, y=15.0)
    incoming, _ = split_trajectory(trajectory_factory("arc", xy), center)
    expected = int(np.argmin(np.hypot(xy[:, 0] - center.x, xy[:, 1] - center.y)))
    assert len(incoming) == expected + 1


@pytest.mark.parametrize("seed", range(10))
def test_split_conserves_points(trajectory_factory, seed):
    """Test that both parts together are the original points in order."""
    rng = np.random.default_rng(seed)
    xy = np.cumsum(rng.normal(0.0, 2.0, size=(int(rng.integers(1, 60)), 2)), axis=0)
    trajectory = trajectory_factory("walk", xy)
    incoming, outgoing = split_trajectory(trajectory, Point2.from_array(rng.uniform(-10.0, 10.0, size=2)))
    assert len(incoming) >= 1
    assert list(incoming.points) + list(outgoing.points) == list(trajectory.points)


def test_reduce_two_points(trajectory_factory):
    summary = reduce_track(trajectory_factory("t", [(0.0, 0.0), (2.0, 0.0)]), Point2(x=10.0, y=0.0))
    assert summary.mean_position.x == pytest.approx(1.0)
    assert summary.mean_position.y == pytest.approx(0.0)
    assert summary.mean_direction.dx == pytest.approx(1.0)
    assert summary.direction_class == DirectionClass.ENTERING
    assert summary.weight == 2


def test_reduce_leaving_part(trajectory_factory):
    summary = reduce_track(trajectory_factory("t", [(1.0, 0.0), (3.0, 0.0), (5.0, 0.0)]), Point2(x=0.0, y=0.0))
    assert summary.direction_class == DirectionClass.LEAVING
    assert summary.mean_position.x == pytest.approx(3.0)


def test_reduce_quarter_arc_heads_along_chord(trajectory_factory):
    """Test that a quarter circle reduces to the direction of its chord."""
    theta = np.linspace(0.0, math.pi / 2.0, 90)
    xy = np.column_stack([10.0 * np.cos(theta), 10.0 * np.sin(theta)])
    summary = reduce_track(trajectory_factory("arc", xy), Point2(x=100.0, y=100.0))
    assert summary.mean_direction.dx == pytest.approx(-math.sqrt(0.5), abs=1e-9)
    assert summary.mean_direction.dy == pytest.approx(math.sqrt(0.5), abs=1e-9)


def test_reduce_needs_two_points(trajectory_factory):
    with pytest.raises(ValueError):
        reduce_track(trajectory_factory("t", [(0.0, 0.0)]), Point2(x=0.0, y=0.0))


def test_summarize_skips_short_parts(trajectory_factory):
    """Test that a trajectory starting at the center yields only its leaving part."""
    trajectory = trajectory_factory("t", [(x, 0.0) for x in range(0, 10)])
    summaries = summarize_trajectories([trajectory], Point2(x=0.0, y=0.0))
    assert len(summaries) == 1
    assert summaries[0].direction_class == DirectionClass.LEAVING
    assert summaries[0].weight == 9


def test_detection_rejects_two_orientations():
    with pytest.raises(ValidationError):
        Detection(x=0.0, y=0.0, dir="entering", heading=[1.0, 0.0])


def test_trajectory_needs_increasing_time():
    with pytest.raises(ValidationError):
        Dataset(trajectories=[{"id": "t", "points": [{"x": 0, "y": 0, "t": 1.0, "dir": "entering"},
                                                      {"x": 1, "y": 0, "t": 1.0, "dir": "entering"}]}])


def test_load_dataset(tmp_path):
    """Test parsing a dataset document written by hand."""
    path = tmp_path / "dataset.json"
    path.write_text(json.dumps({
        "name": "hand",
        "detections": [{"x": 1.0, "y": 2.0, "doppler": -1.5}, {"x": 0.0, "y": 0.0, "heading": [0.0, 2.0]}],
        "trajectories": [{"id": 7, "points": [{"x": 0, "y": 0, "t": 0.0, "dir": "entering"},
                                               {"x": 1, "y": 0, "t": 0.1, "dir": "entering"}]}],
    }))
    dataset = load_dataset(path)
    assert dataset.name == "hand"
    assert dataset.detections[1].heading.dy == pytest.approx(1.0)
    assert dataset.trajectories[0].id == "7"


def test_load_dataset_reports_json_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"detections": [\n  {"x": 1.0,, "y": 2.0}\n]}')
    with pytest.raises(DatasetParseError) as info:
        load_dataset(path)
    assert "line 2" in str(info.value)
    assert str(path) in str(info.value)


def test_load_dataset_reports_field(tmp_path):
    path = tmp_path / "bad-field.json"
    path.write_text(json.dumps({"detections": [{"x": "east", "y": 0.0, "doppler": 1.0}]}))
    with pytest.raises(DatasetParseError) as info:
        load_dataset(path)
    assert "detections.0.x" in str(info.value)


def test_load_missing_dataset(tmp_path):
    with pytest.raises(IntersectionMcmcError):
        load_dataset(tmp_path / "missing.json")


def test_split_center_priority(trajectory_factory):
    dataset = Dataset(
        trajectories=[trajectory_factory("t", [(0.0, 0.0), (4.0, 0.0)])],
        center=Point2(x=1.0, y=1.0),
    )
    assert split_center(dataset, [5.0, 6.0]) == Point2(x=5.0, y=6.0)
    assert split_center(dataset) == Point2(x=1.0, y=1.0)
    assert split_center(dataset.model_copy(update={"center": None})) == Point2(x=2.0, y=0.0)

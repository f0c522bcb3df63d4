"""
Tests for the command-line interface.
"""

import json

import pytest
from typer.testing import CliRunner

from intersection_mcmc.cli import app

runner = CliRunner()

SMALL_GENERATION = {
    "generation": {
        "arm_counts": [3, 4],
        "lanes_per_direction": [1, 2],
        "max_per_lane": 2,
        "noise_sigma": 0.3,
        "clutter_count": 5,
    },
    "parallelism": 1,
}


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(SMALL_GENERATION))
    return path


@pytest.fixture
def suite_dir(tmp_path, small_config):
    out = tmp_path / "suite"
    result = runner.invoke(app, ["generate", "--out", str(out), "--count", "2", "--seed", "3", "--config", str(small_config)])
    assert result.exit_code == 0, result.output
    return out


def _estimate(dataset, out, config):
    return runner.invoke(app, [
        "estimate", str(dataset), "--out", str(out),
        "--stage1-samples", "200", "--stage2-samples", "200", "--seed", "5",
        "--config", str(config),
    ])


def test_help():
    result = runner.invoke(app, ["--help"])
    assert result.exit_code == 0
    for command in ("generate", "estimate", "benchmark", "render"):
        assert command in result.output


def test_generate_writes_suite(suite_dir):
    manifest = json.loads((suite_dir / "manifest.json").read_text())
    names = [entry["name"] for entry in manifest["intersections"]]
    assert names == ["intersection-0", "intersection-1"]
    assert manifest["seed"] == 3
    assert manifest["config"]["generation"]["count"] == 2
    for name in names:
        dataset = json.loads((suite_dir / f"{name}.dataset.json").read_text())
        truth = json.loads((suite_dir / f"{name}.truth.json").read_text())
        assert dataset["trajectories"]
        assert "connections" in truth
        assert truth["config"]["generation"]["noise_sigma"] == 0.3


def test_estimate_is_reproducible(tmp_path, suite_dir, small_config):
    dataset = suite_dir / "intersection-0.dataset.json"
    first, second = tmp_path / "first", tmp_path / "second"
    assert _estimate(dataset, first, small_config).exit_code == 0
    assert _estimate(dataset, second, small_config).exit_code == 0
    for suffix in ("topology.json", "lanelets.json"):
        assert (first / f"intersection-0.{suffix}").read_bytes() == (second / f"intersection-0.{suffix}").read_bytes()
    timing = json.loads((first / "intersection-0.timing.json").read_text())
    assert timing["seed"] == 5
    assert timing["stage1"]["samples"] == 200
    assert timing["stage2"]["samples"] == 200


def test_estimate_records_overrides(tmp_path, suite_dir, small_config):
    out = tmp_path / "estimate"
    result = runner.invoke(app, [
        "estimate", str(suite_dir / "intersection-1.dataset.json"), "--out", str(out),
        "--stage1-samples", "300", "--stage2-samples", "0", "--sigma-ang", "20", "--tau", "2.0",
        "--config", str(small_config),
    ])
    assert result.exit_code == 0, result.output
    topology = json.loads((out / "intersection-1.topology.json").read_text())
    assert topology["config"]["topology"]["sigma_ang"] == pytest.approx(0.3490658503988659)
    assert topology["config"]["lane_course"]["tau"] == 2.0
    assert len(topology["topology"]["arms"]) >= 2


def test_render_draws_all_layers(tmp_path, suite_dir, small_config):
    dataset = suite_dir / "intersection-0.dataset.json"
    estimate = tmp_path / "estimate"
    assert _estimate(dataset, estimate, small_config).exit_code == 0
    svg = tmp_path / "scene.svg"
    result = runner.invoke(app, [
        "render", str(dataset), str(suite_dir / "intersection-0.truth.json"),
        str(estimate / "intersection-0.topology.json"), str(estimate / "intersection-0.lanelets.json"),
        "--out", str(svg),
    ])
    assert result.exit_code == 0, result.output
    text = svg.read_text()
    for layer in ("ground-truth", "trajectories", "detections", "topology", "lanelets", "lanelet-centers"):
        assert f'id="{layer}"' in text


def test_estimate_rejects_broken_dataset(tmp_path):
    dataset = tmp_path / "broken.dataset.json"
    dataset.write_text('{"detections": [')
    result = runner.invoke(app, ["estimate", str(dataset), "--out", str(tmp_path / "out")])
    assert result.exit_code == 1
    assert not (tmp_path / "out").exists()


def test_invalid_config_exits(tmp_path):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"topology": {"sigma_perp": -1.0}}))
    result = runner.invoke(app, ["generate", "--out", str(tmp_path / "suite"), "--config", str(config)])
    assert result.exit_code == 1


def test_render_rejects_unknown_document(tmp_path):
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"hello": "world"}))
    result = runner.invoke(app, ["render", str(other), "--out", str(tmp_path / "x.svg")])
    assert result.exit_code == 1


def test_estimate_with_time_budget(tmp_path, suite_dir, small_config):
    out = tmp_path / "budgeted"
    result = runner.invoke(app, [
        "estimate", str(suite_dir / "intersection-0.dataset.json"), "--out", str(out),
        "--stage1-samples", "1000000", "--stage2-samples", "100", "--time-budget", "0.2",
        "--config", str(small_config),
    ])
    assert result.exit_code == 0, result.output
    timing = json.loads((out / "intersection-0.timing.json").read_text())
    assert timing["config"]["topology"]["time_budget"] == 0.2
    assert timing["config"]["lane_course"]["time_budget"] == 0.2
    assert 0 < timing["stage1"]["proposed"] < 1000000
    assert timing["stage2"]["proposed"] <= 100


def _two_way_detections():
    detections = []
    for s in range(8, 50, 2):
        for axis in ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)):
            nx, ny = axis[1], -axis[0]
            inbound = [s * axis[0] - 1.75 * nx, s * axis[1] - 1.75 * ny]
            outbound = [s * axis[0] + 1.75 * nx, s * axis[1] + 1.75 * ny]
            detections.append({"x": inbound[0], "y": inbound[1], "heading": [-axis[0], -axis[1]]})
            detections.append({"x": outbound[0], "y": outbound[1], "heading": [axis[0], axis[1]]})
            # opposing traffic inside one voxel
            detections.append({"x": s * axis[0] + 0.1, "y": s * axis[1] + 0.1, "heading": [-axis[0], -axis[1]]})
            detections.append({"x": s * axis[0] + 0.2, "y": s * axis[1] + 0.2, "heading": [axis[0], axis[1]]})
    return detections


def test_estimate_from_oriented_detections(tmp_path):
    dataset = tmp_path / "crossing.dataset.json"
    dataset.write_text(json.dumps({"name": "crossing", "detections": _two_way_detections()}))
    out = tmp_path / "out"
    result = runner.invoke(app, [
        "estimate", str(dataset), "--out", str(out), "--input", "detections", "--stage1-samples", "300",
    ])
    assert result.exit_code == 0, result.output
    timing = json.loads((out / "crossing.timing.json").read_text())
    assert timing["input_mode"] == "detections"
    assert "stage2" not in timing
    assert not (out / "crossing.lanelets.json").exists()

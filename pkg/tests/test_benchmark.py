"""
Tests for the benchmark suite runner.
"""

import csv
import json

import pytest

from intersection_mcmc.benchmark import CSV_COLUMNS, benchmark, discover, evaluate_intersection, run_benchmark
from intersection_mcmc.config import RunConfig
from intersection_mcmc.errors import IntersectionMcmcError
from intersection_mcmc.ingest import save_dataset
from intersection_mcmc.synthetic import generate_suite, save_ground_truth


@pytest.fixture
def suite_dir(tmp_path, small_params):
    out = tmp_path / "suite"
    for gt, dataset, seed in generate_suite(small_params):
        save_dataset(dataset, out / f"{gt.name}.dataset.json")
        save_ground_truth(gt, out / f"{gt.name}.truth.json", seed)
    return out


def _config(stage1=150, stage2=100):
    cfg = RunConfig(parallelism=1)
    return cfg.model_copy(update={
        "topology": cfg.topology.model_copy(update={"n_samples": stage1}),
        "lane_course": cfg.lane_course.model_copy(update={"n_samples": stage2}),
    })


def test_discover_pairs(suite_dir):
    pairs = discover(suite_dir)
    assert [name for name, _, _ in pairs] == ["intersection-0", "intersection-1"]


def test_discover_skips_dataset_without_truth(suite_dir):
    (suite_dir / "intersection-1.truth.json").unlink()
    assert [name for name, _, _ in discover(suite_dir)] == ["intersection-0"]


def test_discover_missing_directory(tmp_path):
    with pytest.raises(IntersectionMcmcError):
        discover(tmp_path / "nowhere")


def test_discover_empty_directory(tmp_path):
    with pytest.raises(IntersectionMcmcError):
        discover(tmp_path)


def test_evaluate_records_failure(tmp_path, suite_dir):
    row = evaluate_intersection(
        "intersection-0",
        suite_dir / "intersection-0.dataset.json",
        tmp_path / "missing.truth.json",
        _config().model_dump(mode="json"),
        10, 10,
    )
    assert row.error
    assert row.topology is None


def test_evaluate_one_intersection(suite_dir):
    row = evaluate_intersection(
        "intersection-0",
        suite_dir / "intersection-0.dataset.json",
        suite_dir / "intersection-0.truth.json",
        _config().model_dump(mode="json"),
        150, 100,
    )
    assert row.error is None
    assert row.category in ("small", "big")
    assert row.topology is not None
    assert row.stage1_samples == 150
    assert row.stage1_seconds > 0.0
    truth = json.loads((suite_dir / "intersection-0.truth.json").read_text())
    assert row.seed == truth["seed"]


@pytest.mark.slow
@pytest.mark.asyncio
async def test_run_benchmark_sweep(suite_dir):
    """Test that a two-point sweep yields one row per intersection and setting."""
    rows = await run_benchmark(suite_dir, _config(), sweep=[50, 100], parallelism=1)
    assert [(r.stage1_samples, r.name) for r in rows] == [
        (50, "intersection-0"), (50, "intersection-1"), (100, "intersection-0"), (100, "intersection-1"),
    ]
    assert all(r.stage1_samples == r.stage2_samples for r in rows)


@pytest.mark.slow
@pytest.mark.asyncio
async def test_benchmark_writes_reports(tmp_path, suite_dir):
    out = tmp_path / "reports"
    summary = await benchmark(suite_dir, out, _config(), parallelism=1)
    assert summary.count == 2
    with (out / "rows.csv").open() as handle:
        reader = csv.DictReader(handle)
        assert reader.fieldnames == CSV_COLUMNS
        assert len(list(reader)) == 2
    rows = json.loads((out / "rows.json").read_text())
    assert len(rows["rows"]) == 2
    written = json.loads((out / "summary.json").read_text())
    assert written["summary"]["count"] == 2
    assert written["config"]["parallelism"] == 1

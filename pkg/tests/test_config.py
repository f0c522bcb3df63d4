"""
Tests for configuration loading.
"""

import json
import math

import pytest

from intersection_mcmc.config import ENV_PREFIX, LaneCourseConfig, TopologyConfig, load_config
from intersection_mcmc.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for suffix in ("SEED", "PARALLELISM", "STAGE1_SAMPLES", "STAGE2_SAMPLES", "INPUT_MODE"):
        monkeypatch.delenv(ENV_PREFIX + suffix, raising=False)


def test_defaults():
    cfg = load_config()
    assert cfg.topology.n_samples == 5000
    assert cfg.lane_course.n_samples == 20000
    assert cfg.topology.sigma_ang == pytest.approx(math.radians(10.0))
    assert cfg.input_mode == "tracked"
    assert sum(cfg.topology.lane_count_prior.values()) == pytest.approx(1.0)
    assert cfg.parallelism == 1
    assert cfg.topology.time_budget is None
    assert cfg.topology.summary_weighting == "unit"
    assert cfg.topology.initial_center == "heading_lines"


def test_document_then_overrides(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"seed": 4, "topology": {"n_samples": 10, "sigma_perp": 2.0}}))
    cfg = load_config(path, {"topology": {"n_samples": 20}})
    assert cfg.seed == 4
    assert cfg.topology.n_samples == 20
    assert cfg.topology.sigma_perp == 2.0


def test_environment(monkeypatch):
    monkeypatch.setenv(ENV_PREFIX + "STAGE1_SAMPLES", "123")
    monkeypatch.setenv(ENV_PREFIX + "INPUT_MODE", "detections")
    cfg = load_config(overrides={"seed": 9})
    assert cfg.topology.n_samples == 123
    assert cfg.input_mode == "detections"
    assert cfg.seed == 9


def test_overrides_beat_environment(monkeypatch):
    monkeypatch.setenv(ENV_PREFIX + "SEED", "1")
    assert load_config(overrides={"seed": 2}).seed == 2


def test_invalid_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{\n  seed: 1\n}")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert "line 2" in str(info.value)


def test_invalid_value_names_field():
    with pytest.raises(ConfigError) as info:
        load_config(overrides={"lane_course": {"tau": 0.0}})
    assert "lane_course.tau" in str(info.value)


def test_missing_document(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")


def test_prior_must_be_normalized():
    with pytest.raises(ValueError):
        TopologyConfig(arm_count_prior={3: 0.5, 4: 0.4})


def test_schedule_from_document(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"lane_course": {"schedule": {"t_initial": 5.0, "t_final": 0.5}}}))
    cfg = load_config(path)
    assert cfg.lane_course.schedule.t_initial == 5.0
    assert cfg.topology.schedule.t_initial == LaneCourseConfig().schedule.t_initial


def test_parallelism_from_environment(monkeypatch):
    monkeypatch.setenv(ENV_PREFIX + "PARALLELISM", "3")
    assert load_config().parallelism == 3


def test_time_budget_must_be_positive():
    with pytest.raises(ConfigError) as info:
        load_config(overrides={"topology": {"time_budget": 0.0}})
    assert "topology.time_budget" in str(info.value)


def test_lane_prior_has_geometric_tail():
    prior = TopologyConfig().lane_count_prior
    assert min(prior) == 2
    assert max(prior) == 48
    assert prior[10] / prior[9] == pytest.approx(0.6)

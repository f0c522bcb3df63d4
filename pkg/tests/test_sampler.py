"""
Tests for the annealed Metropolis engine and the move registry.
"""

import math
import time

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

import intersection_mcmc.lanes.proposals  # noqa: F401  registers the lane_course kernel
import intersection_mcmc.topology.proposals  # noqa: F401  registers the topology kernel
from intersection_mcmc.engine.registry import describe_moves, get_move, move, select_move
from intersection_mcmc.engine.sampler import AnnealingSchedule, acceptance_probability, run_chain
from intersection_mcmc.errors import InitializationError

TOY_POSTERIOR = [math.log(0.7), math.log(0.2), math.log(0.1)]


def _toy_propose(state: int, rng: np.random.Generator) -> int:
    return (state + 1 + int(rng.integers(2))) % 3


def _toy_posterior(state: int) -> float:
    return TOY_POSTERIOR[state]


def test_acceptance_equal_posteriors():
    assert acceptance_probability(-3.0, -3.0, 1.0) == 1.0


def test_acceptance_halved_posterior():
    assert acceptance_probability(math.log(0.5), 0.0, 1.0) == pytest.approx(0.5)


def test_acceptance_heated():
    """Test that temperature 2 flattens a halved posterior to √0.5."""
    assert acceptance_probability(math.log(0.5), 0.0, 2.0) == pytest.approx(math.sqrt(0.5))


def test_acceptance_impossible_state():
    assert acceptance_probability(-math.inf, 0.0, 1.0) == 0.0


def test_acceptance_rejects_zero_temperature():
    with pytest.raises(ValueError):
        acceptance_probability(0.0, 0.0, 0.0)


def test_schedule_is_geometric():
    schedule = AnnealingSchedule(t_initial=4.0, t_final=1.0, n_steps=11)
    assert schedule.temperature(0) == pytest.approx(4.0)
    assert schedule.temperature(5) == pytest.approx(2.0)
    assert schedule.temperature(10) == pytest.approx(1.0)


def test_last_step_reaches_final_temperature():
    temperatures = []
    schedule = AnnealingSchedule(t_initial=2.0, t_final=0.2, n_steps=50)
    run_chain(0, _toy_propose, _toy_posterior, schedule, seed=0,
              on_step=lambda step, temperature, best: temperatures.append(temperature))
    assert temperatures[0] == pytest.approx(2.0)
    assert temperatures[-1] == pytest.approx(0.2)
    assert temperatures == sorted(temperatures, reverse=True)


def test_single_step_schedule_runs_hot():
    assert AnnealingSchedule(t_initial=3.0, t_final=0.5, n_steps=1).temperature(0) == pytest.approx(3.0)


def test_schedule_rejects_heating():
    with pytest.raises(ValidationError):
        AnnealingSchedule(t_initial=0.1, t_final=1.0)


def test_zero_steps_returns_initial():
    result = run_chain(2, _toy_propose, _toy_posterior, AnnealingSchedule(n_steps=0), seed=1)
    assert result.best_state == 2
    assert result.proposed_count == 0
    assert result.acceptance_rate == 0.0


def test_toy_chain_finds_mode():
    """Test that a three-state chain reports the enumerated mode."""
    schedule = AnnealingSchedule(t_initial=1.0, t_final=1.0, n_steps=10_000)
    result = run_chain(2, _toy_propose, _toy_posterior, schedule, seed=3)
    assert result.best_state == 0
    assert result.best_log_posterior == pytest.approx(math.log(0.7))
    assert result.proposed_count == 10_000


def test_chain_is_deterministic():
    schedule = AnnealingSchedule(n_steps=500)
    first = run_chain(2, _toy_propose, _toy_posterior, schedule, seed=42)
    second = run_chain(2, _toy_propose, _toy_posterior, schedule, seed=42)
    assert first.model_dump() == second.model_dump()


def test_chain_returns_best_not_final():
    """Test that the MAP state is kept after the chain wanders off it."""
    schedule = AnnealingSchedule(t_initial=50.0, t_final=50.0, n_steps=200)
    result = run_chain(0, lambda x, rng: x + 1, lambda x: -float(x), schedule, seed=0)
    assert result.accepted_count > 0
    assert result.best_state == 0
    assert result.best_log_posterior == 0.0


def test_chain_rejects_impossible_initial_state():
    with pytest.raises(InitializationError):
        run_chain(0, _toy_propose, lambda state: -math.inf, AnnealingSchedule(n_steps=5), seed=0)


def test_chain_reports_every_step():
    steps = []
    run_chain(0, _toy_propose, _toy_posterior, AnnealingSchedule(n_steps=25), seed=0,
              on_step=lambda step, temperature, best: steps.append(step))
    assert steps == list(range(25))


@pytest.mark.parametrize(
    "omega, expected",
    [
        (0.0, "rotate_arm"),
        (0.399, "rotate_arm"),
        (0.401, "shift_center"),
        (0.65, "change_gap"),
        (0.75, "add_remove_arm"),
        (0.9, "add_remove_lane"),
        (0.9999, "add_remove_lane"),
    ],
)
def test_select_topology_move(omega, expected):
    assert select_move("topology", omega) == expected


def test_topology_move_frequencies():
    """Test that uniform draws hit the moves with masses 0.4, 0.2, 0.1, 0.15 and 0.15."""
    rng = np.random.default_rng(5)
    names = [select_move("topology", omega) for omega in rng.random(100_000)]
    expected = {"rotate_arm": 0.4, "shift_center": 0.2, "change_gap": 0.1, "add_remove_arm": 0.15, "add_remove_lane": 0.15}
    for name, mass in expected.items():
        assert names.count(name) / len(names) == pytest.approx(mass, abs=0.01)


def test_lane_course_move_frequencies():
    rng = np.random.default_rng(6)
    names = [select_move("lane_course", omega) for omega in rng.random(100_000)]
    for name in ("move_point", "split_point", "merge_points"):
        assert names.count(name) / len(names) == pytest.approx(1.0 / 3.0, abs=0.01)


def test_describe_moves_keeps_registration_order():
    assert [m["name"] for m in describe_moves("topology")] == [
        "rotate_arm", "shift_center", "change_gap", "add_remove_arm", "add_remove_lane",
    ]


def test_registry_rejects_massless_move():
    with pytest.raises(ValueError):
        move("toy", "nothing", 0.0)


def test_unknown_kernel_has_no_moves():
    assert get_move("no-such-kernel", "rotate_arm") is None
    with pytest.raises(ValueError):
        select_move("no-such-kernel", 0.5)


def test_time_budget_stops_chain_early():
    def slow_propose(state, rng):
        time.sleep(0.01)
        return _toy_propose(state, rng)

    schedule = AnnealingSchedule(n_steps=1000)
    result = run_chain(0, slow_propose, _toy_posterior, schedule, seed=0, time_budget=0.05)
    assert 0 < result.proposed_count < schedule.n_steps


@pytest.mark.slow
def test_chain_visits_states_in_posterior_proportion():
    """Test that a constant-temperature chain is stationary on the posterior (chi-square, thinned)."""
    visits = []

    def recording_propose(state, rng):
        visits.append(state)
        return _toy_propose(state, rng)

    schedule = AnnealingSchedule(t_initial=1.0, t_final=1.0, n_steps=1_000_000)
    run_chain(0, recording_propose, _toy_posterior, schedule, seed=17)
    thinned = np.asarray(visits[1000::10])
    observed = np.bincount(thinned, minlength=3)
    expected = np.exp(TOY_POSTERIOR) * len(thinned)
    assert chisquare(observed, expected).pvalue > 1e-3
    assert observed / len(thinned) == pytest.approx([0.7, 0.2, 0.1], abs=0.01)

"""
Metropolis sampler with geometric simulated annealing.

The sampler is generic over the state type. It only needs a proposal kernel
`propose(state, rng) -> state` and an unnormalized log-posterior scorer.
Proposals are treated as symmetric; no Hastings correction is applied.
"""

import logging
import math
import time
from typing import Callable, Generic, Optional, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import InitializationError

logger = logging.getLogger("intersection_mcmc.engine")

StateT = TypeVar("StateT")

ProposalKernel = Callable[[StateT, np.random.Generator], StateT]
LogPosterior = Callable[[StateT], float]
StepCallback = Callable[[int, float, float], None]


class AnnealingSchedule(BaseModel):
    """Geometric cooling from t_initial to t_final over n_steps."""
    t_initial: float = Field(2.0, gt=0.0, description="Temperature at the first step")
    t_final: float = Field(0.2, gt=0.0, description="Temperature reached at the last step")
    n_steps: int = Field(0, ge=0, description="Number of propose/accept iterations")

    @model_validator(mode="after")
    def _ordered(self) -> "AnnealingSchedule":
        if self.t_initial < self.t_final:
            raise ValueError("t_initial must be >= t_final")
        return self

    def temperature(self, step: int) -> float:
        """T_k = t_initial · (t_final / t_initial)^(k / (n_steps − 1)); the last step runs at t_final."""
        if self.n_steps == 0:
            return self.t_initial
        fraction = min(1.0, step / max(1, self.n_steps - 1))
        return self.t_initial * (self.t_final / self.t_initial) ** fraction

    def with_steps(self, n_steps: int) -> "AnnealingSchedule":
        return self.model_copy(update={"n_steps": n_steps})


class ChainResult(BaseModel, Generic[StateT]):
    """Outcome of one chain run; best_state is the MAP sample of the whole run."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    best_state: StateT
    best_log_posterior: float
    accepted_count: int = Field(..., ge=0)
    proposed_count: int = Field(..., ge=0)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted_count / self.proposed_count if self.proposed_count else 0.0


def acceptance_probability(log_post_new: float, log_post_old: float, temperature: float) -> float:
    """Metropolis acceptance min(1, exp((new − old) / T)) on log posteriors."""
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    if log_post_new == -math.inf or math.isnan(log_post_new):
        return 0.0
    delta = (log_post_new - log_post_old) / temperature
    if delta >= 0.0:
        return 1.0
    return math.exp(delta)


def run_chain(
    initial: StateT,
    propose: ProposalKernel,
    log_posterior: LogPosterior,
    schedule: AnnealingSchedule,
    seed: int,
    *,
    time_budget: Optional[float] = None,
    on_step: Optional[StepCallback] = None,
) -> ChainResult:
    """Run a single annealed Metropolis chain.

    Args:
        initial: Starting state; must have a finite log posterior
        propose: Proposal kernel receiving the current state and the chain's generator
        log_posterior: Unnormalized log posterior of a state
        schedule: Annealing schedule; n_steps iterations are executed
        seed: Seed of the only random stream the chain uses
        time_budget: Optional wall-clock limit in seconds; stops early when exceeded
        on_step: Optional progress callback (step, temperature, best log posterior)

    Returns:
        ChainResult holding the best state seen over the whole run

    Raises:
        InitializationError: If the initial state has log posterior −∞
    """
    rng = np.random.default_rng(seed)
    current = initial
    current_lp = float(log_posterior(initial))
    if not math.isfinite(current_lp):
        raise InitializationError(f"Initial state has log posterior {current_lp}")

    best, best_lp = current, current_lp
    accepted = 0
    proposed = 0
    started = time.perf_counter()
    report_every = max(1, schedule.n_steps // 10)

    for step in range(schedule.n_steps):
        if time_budget is not None and time.perf_counter() - started > time_budget:
            logger.debug(f"Time budget of {time_budget:.3f}s reached after {step} steps")
            break
        temperature = schedule.temperature(step)
        candidate = propose(current, rng)
        candidate_lp = float(log_posterior(candidate))
        proposed += 1

        if rng.random() < acceptance_probability(candidate_lp, current_lp, temperature):
            current, current_lp = candidate, candidate_lp
            accepted += 1
            if current_lp > best_lp:
                best, best_lp = current, current_lp

        if on_step is not None:
            on_step(step, temperature, best_lp)
        if step % report_every == 0:
            logger.debug(f"step {step}: T={temperature:.3f} current={current_lp:.3f} best={best_lp:.3f}")

    return ChainResult(
        best_state=best,
        best_log_posterior=best_lp,
        accepted_count=accepted,
        proposed_count=proposed,
    )

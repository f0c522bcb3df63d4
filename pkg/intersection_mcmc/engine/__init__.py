"""
Generic Metropolis sampling with simulated annealing.
"""

from .registry import move, get_move_registry, get_move, select_move, describe_moves
from .sampler import AnnealingSchedule, ChainResult, acceptance_probability, run_chain

__all__ = [
    "move",
    "get_move_registry",
    "get_move",
    "select_move",
    "describe_moves",
    "AnnealingSchedule",
    "ChainResult",
    "acceptance_probability",
    "run_chain",
]

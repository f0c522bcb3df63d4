"""
Proposal move registry and decorator for the samplers.

Each proposal kernel (e.g. "topology", "lane_course") registers its moves with
the probability mass they receive. Registration order fixes the thresholds a
uniform draw ω is compared against.
"""

from typing import Any, Callable, Dict, List, Optional

# Global registry: kernel name -> move name -> move metadata
_MOVE_REGISTRY: Dict[str, Dict[str, Dict[str, Any]]] = {}


def move(kernel: str, name: str, probability: float, description: str = ""):
    """Decorator to register a proposal move.

    Args:
        kernel: Name of the proposal kernel the move belongs to
        name: Name of the move
        probability: Probability mass of the move within its kernel
        description: Short description used in logs
    """
    if probability <= 0.0:
        raise ValueError(f"Move {kernel}.{name} needs a positive probability")

    def decorator(func: Callable):
        _MOVE_REGISTRY.setdefault(kernel, {})[name] = {
            "name": name,
            "probability": probability,
            "description": description or (func.__doc__ or "").strip().splitlines()[0],
            "function": func,
        }
        return func
    return decorator


def get_move_registry(kernel: str) -> Dict[str, Dict[str, Any]]:
    """Get all registered moves of a kernel, in registration order."""
    return _MOVE_REGISTRY.get(kernel, {})


def get_move(kernel: str, name: str) -> Optional[Dict[str, Any]]:
    """Get a specific move by name.

    Returns:
        Move metadata dictionary if found, None otherwise
    """
    return get_move_registry(kernel).get(name)


def select_move(kernel: str, omega: float) -> str:
    """Map a uniform draw ω ∈ [0, 1) onto the move whose cumulative mass covers it.

    Masses are normalized, so a kernel whose probabilities do not sum to one
    still partitions [0, 1).
    """
    moves = list(get_move_registry(kernel).values())
    if not moves:
        raise ValueError(f"No moves registered for kernel {kernel}")
    total = sum(m["probability"] for m in moves)
    threshold = 0.0
    for entry in moves:
        threshold += entry["probability"] / total
        if omega < threshold:
            return entry["name"]
    return moves[-1]["name"]


def describe_moves(kernel: str) -> List[Dict[str, Any]]:
    """Move names, masses and descriptions of a kernel for logs and artifacts."""
    return [
        {
            "name": entry["name"],
            "probability": entry["probability"],
            "description": entry["description"],
        }
        for entry in get_move_registry(kernel).values()
    ]

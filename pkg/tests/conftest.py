"""
Shared fixtures for the intersection-mcmc tests.
"""

import math
from typing import Dict, List, Optional

import numpy as np
import pytest

from intersection_mcmc.config import GenerationParams, LaneCourseConfig, TopologyConfig
from intersection_mcmc.geometry import Point2
from intersection_mcmc.models.measurement import Detection, DirectionClass, Trajectory
from intersection_mcmc.models.topology import Arm, Lane, TopologyModel
from intersection_mcmc.synthetic import generate_intersection


class StubRng:
    """Generator whose next draws per method are fixed; later draws fall through to a seeded generator."""

    def __init__(self, **forced: List[float]):
        self._forced: Dict[str, List[float]] = {name: list(values) for name, values in forced.items()}
        self._fallback = np.random.default_rng(0)

    def _next(self, name: str, *args, **kwargs):
        queue = self._forced.get(name)
        if queue:
            return queue.pop(0)
        return getattr(self._fallback, name)(*args, **kwargs)

    def random(self, *args, **kwargs):
        return self._next("random", *args, **kwargs)

    def uniform(self, *args, **kwargs):
        return self._next("uniform", *args, **kwargs)

    def integers(self, *args, **kwargs):
        return self._next("integers", *args, **kwargs)

    def normal(self, *args, **kwargs):
        return self._next("normal", *args, **kwargs)


def make_arm(heading: float, lanes_in: int = 1, lanes_out: int = 1, gap: float = 0.0, width: float = 3.5) -> Arm:
    return Arm(
        heading=heading,
        gap=gap,
        lanes_in=[Lane(direction=DirectionClass.ENTERING, width=width, offset_index=k) for k in range(lanes_in)],
        lanes_out=[Lane(direction=DirectionClass.LEAVING, width=width, offset_index=k) for k in range(lanes_out)],
    )


def make_trajectory(trajectory_id: str, xy, dt: float = 0.2, doppler: Optional[float] = None) -> Trajectory:
    """Trajectory through the given points; every point carries a Doppler value."""
    return Trajectory(
        id=trajectory_id,
        points=[
            Detection(x=float(x), y=float(y), t=i * dt, doppler=1.0 if doppler is None else doppler)
            for i, (x, y) in enumerate(np.asarray(xy, dtype=float))
        ],
    )


@pytest.fixture
def stub_rng():
    """Factory for generators with forced draws."""
    return StubRng


@pytest.fixture
def arm_factory():
    return make_arm


@pytest.fixture
def trajectory_factory():
    return make_trajectory


@pytest.fixture
def topo_cfg() -> TopologyConfig:
    return TopologyConfig()


@pytest.fixture
def lane_cfg() -> LaneCourseConfig:
    return LaneCourseConfig(n_samples=40)


@pytest.fixture
def cross_topology() -> TopologyModel:
    """Four perpendicular arms, one 3.5 m lane per direction, no gaps."""
    return TopologyModel(
        center=Point2(x=0.0, y=0.0),
        arms=[make_arm(k * math.pi / 2.0) for k in range(4)],
    )


@pytest.fixture
def road_topology() -> TopologyModel:
    """A straight road through the origin (arms at 0 and π) with a 1 m gap."""
    return TopologyModel(
        center=Point2(x=0.0, y=0.0),
        arms=[make_arm(0.0, gap=1.0), make_arm(math.pi, gap=1.0)],
    )


@pytest.fixture
def small_params() -> GenerationParams:
    return GenerationParams(
        arm_counts=[3, 4],
        lanes_per_direction=[1, 2],
        max_per_lane=2,
        noise_sigma=0.0,
        clutter_count=0,
        count=2,
        seed=11,
    )


@pytest.fixture
def ground_truth(small_params):
    """A generated intersection with small lane counts."""
    return generate_intersection(small_params, np.random.default_rng(7), name="fixture")

"""Reference benchmark instances bundled with the package.

Each row pairs a committed fixture (see fixtures/) with the reference
results it was calibrated against: the fixture reproduces the initial
waiting exactly, and the reference enhanced waiting records the
improvement the optimizer is expected to reach on an instance of that
shape.  reproduce-tables regenerates these tables from the fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True)
class TierInstance:
    """Whole-tier instance: the virtual-queue GA optimizes all queues at once."""

    fixture: str
    length: int
    initial_waiting: float
    initial_penalty: float
    reference_waiting: float
    reference_penalty: float
    waiting_improvement_pct: float
    penalty_improvement_pct: float
    generations: int


@dataclass(frozen=True)
class QueueInstance:
    """Single-queue instance: one resource queue optimized in isolation."""

    fixture: str
    queue_index: int
    length: int
    initial_waiting: float
    initial_penalty: float
    reference_waiting: float
    reference_penalty: float
    waiting_improvement_pct: float
    penalty_improvement_pct: float
    generations: int


# 500 generations for instances up to 19 jobs, 1000 for larger ones
TIER_INSTANCES = (
    TierInstance("tier_12jobs", 12, 47.8462, 0.380, 30.4821, 0.263, 36.29, 30.90, 500),
    TierInstance("tier_15jobs", 15, 50.8813, 0.399, 41.1748, 0.338, 19.08, 15.37, 500),
    TierInstance("tier_19jobs", 19, 88.0743, 0.586, 46.3381, 0.371, 47.39, 36.66, 500),
    TierInstance("tier_31jobs", 31, 126.4679, 0.718, 94.0426, 0.610, 25.64, 15.07, 1000),
    TierInstance("tier_32jobs", 32, 217.1755, 0.886, 164.4844, 0.807, 24.26, 8.92, 1000),
    TierInstance("tier_27jobs", 27, 63.0545, 0.468, 51.2031, 0.401, 18.80, 14.32, 1000),
)

QUEUE_INSTANCES = (
    QueueInstance("queues_14_16_15", 0, 14, 154.1339, 0.786, 98.5818, 0.627, 36.04, 20.24, 500),
    QueueInstance("queues_14_16_15", 1, 16, 137.3684, 0.747, 69.4641, 0.501, 49.43, 32.95, 500),
    QueueInstance("queues_14_16_15", 2, 15, 130.0566, 0.728, 77.3358, 0.539, 40.54, 25.99, 500),
    QueueInstance("queues_19_23_14", 0, 19, 150.8208, 0.779, 98.1834, 0.625, 34.90, 19.69, 500),
    QueueInstance("queues_19_23_14", 1, 23, 208.596, 0.876, 87.2667, 0.582, 58.16, 33.53, 1000),
    QueueInstance("queues_19_23_14", 2, 14, 145.0253, 0.765, 63.8502, 0.472, 55.97, 38.35, 500),
)


def fixture_path(name: str):
    """Filesystem path of a bundled fixture, by bare name without extension."""
    return resources.files("tiersched") / "fixtures" / (name + ".txt")

"""Scheduling strategies: the two GA optimizers and the dispatch baselines.

virtual_ga optimizes the whole tier as one virtual queue (jobs may migrate
between resources); segmented_ga runs an independent GA inside each queue;
wrr and wlc are dispatch-only baselines that never reorder waiting jobs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .ga import GaConfig, GaRun, run_ga
from .model import TierSnapshot, VirtualQueue

VIRTUAL_GA = "virtual_ga"
SEGMENTED_GA = "segmented_ga"
WRR = "wrr"
WLC = "wlc"
STRATEGY_KINDS = (VIRTUAL_GA, SEGMENTED_GA, WRR, WLC)
GA_KINDS = (VIRTUAL_GA, SEGMENTED_GA)


@dataclass(frozen=True)
class Strategy:
    """A strategy kind plus its parameters.

    GA kinds need a GaConfig; weights parameterize wrr/wlc and default to
    equal weights (identical resources).
    """

    kind: str
    ga: GaConfig = None
    weights: tuple = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError("unknown strategy kind %r, expected one of %s"
                             % (self.kind, ", ".join(STRATEGY_KINDS)))
        if self.kind in GA_KINDS and self.ga is None:
            raise ValueError("strategy %r needs a GA configuration" % (self.kind,))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(self.weights))
            if any(w <= 0 for w in self.weights):
                raise ValueError("strategy weights must be strictly positive")
            if self.kind == WRR and any(int(w) != w for w in self.weights):
                raise ValueError("wrr weights must be whole numbers")


@dataclass(frozen=True)
class WrrCursor:
    """Position in the expanded weight cycle; dispatch returns the successor."""

    cycle: tuple
    position: int = 0

    @classmethod
    def for_queues(cls, num_queues: int, weights=None) -> "WrrCursor":
        if num_queues < 1:
            raise ValueError("need at least one queue")
        if weights is None:
            weights = (1,) * num_queues
        if len(weights) != num_queues:
            raise ValueError("need one weight per queue")
        cycle = []
        for k, w in enumerate(weights):
            if w < 1 or int(w) != w:
                raise ValueError("wrr weights must be positive whole numbers")
            cycle.extend([k] * int(w))
        return cls(cycle=tuple(cycle))


def dispatch_wrr(state, job, cursor: WrrCursor):
    """Next queue index in the weighted cycle; returns (index, advanced cursor).

    Equal weights degenerate to plain round robin.  Only the cursor moves;
    tier state and job are accepted for interface parity with dispatch_wlc.
    """
    k = cursor.cycle[cursor.position]
    return k, WrrCursor(cycle=cursor.cycle, position=(cursor.position + 1) % len(cursor.cycle))


def _wlc_pick(loads, weights=None) -> int:
    if weights is None:
        weights = (1.0,) * len(loads)
    best, best_ratio = 0, None
    for k, load in enumerate(loads):
        ratio = load / weights[k]
        if best_ratio is None or ratio < best_ratio:
            best, best_ratio = k, ratio
    return best


def dispatch_wlc(state: TierSnapshot, job, weights=None) -> int:
    """Queue with the least weight-adjusted connections, ties to the lowest index.

    A resource's load counts its waiting jobs plus the in-service one
    (busy_until > 0 marks a job in service).
    """
    if weights is not None and len(weights) != state.num_queues:
        raise ValueError("need one weight per queue")
    loads = [len(q) + (1 if state.busy_until[k] > 0 else 0)
             for k, q in enumerate(state.queues)]
    return _wlc_pick(loads, weights)


def _single_queue_snapshot(snapshot: TierSnapshot, k: int) -> TierSnapshot:
    queue = snapshot.queues[k]
    return TierSnapshot(tier_index=snapshot.tier_index,
                        queues=(queue,),
                        exec_of={j: snapshot.exec_of[j] for j in queue},
                        busy_until=(snapshot.busy_until[k],))


def segment_runs(snapshot: TierSnapshot, config: GaConfig) -> list:
    """One independent GA run per resource queue, seeds derived from config.seed."""
    seed_rng = random.Random(config.seed)
    runs = []
    for k in range(snapshot.num_queues):
        sub = _single_queue_snapshot(snapshot, k)
        sub_config = GaConfig(population_size=config.population_size,
                              max_generations=config.max_generations,
                              operator_rate=config.operator_rate,
                              seed=seed_rng.randrange(2 ** 32))
        runs.append(run_ga(sub, sub_config))
    return runs


def run_segmented_ga(snapshot: TierSnapshot, config: GaConfig) -> GaRun:
    """Per-queue GA without migration: each queue is optimized in isolation.

    Returns the concatenated per-queue best orders and the summed fitness;
    the trace is the per-generation sum of the per-queue traces.
    """
    runs = segment_runs(snapshot, config)
    order = tuple(j for r in runs for j in r.best_order.order)
    cuts = []
    pos = 0
    for q in snapshot.queues[:-1]:
        pos += len(q)
        cuts.append(pos)
    best = VirtualQueue(order=order, boundaries=tuple(cuts))
    trace = [(g, sum(r.trace[g][1] for r in runs))
             for g in range(config.max_generations + 1)]
    return GaRun(best_order=best,
                 best_fitness=sum(r.best_fitness for r in runs),
                 trace=trace,
                 initial_fitness=sum(r.initial_fitness for r in runs))

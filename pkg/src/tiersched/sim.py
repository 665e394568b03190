"""Discrete-event simulation of jobs flowing through the tiers.

Each tier is a bank of parallel resources with private FIFO queues and
non-preemptive service.  A job finishing tier j arrives at tier j+1 at
the same instant.  Dispatch-only strategies (wrr, wlc) pick a queue per
arrival and never touch waiting jobs; GA strategies dispatch arrivals to
the least-loaded queue and periodically re-optimize the waiting jobs of
the tier in place.  Waiting is measured from arrival at a tier to service
start there.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .ga import GaConfig, GaRun, run_ga
from .model import (Environment, Job, PenaltyModel, TierSnapshot, job_penalty)
from .policies import (GA_KINDS, SEGMENTED_GA, VIRTUAL_GA, WLC, WRR,
                       Strategy, WrrCursor, _wlc_pick, dispatch_wrr,
                       run_segmented_ga)

# event kinds double as heap priorities at equal timestamps
SERVICE_COMPLETE = 0
ARRIVAL = 1
REOPTIMIZE = 2


class Event(NamedTuple):
    """Heap entry; (time, kind, tiebreak, seq) fixes the processing order.

    tiebreak is the job id for job events and the tier for re-optimization
    events; seq is a global push counter so ordering is always total.
    """

    time: float
    kind: int
    tiebreak: int
    seq: int
    job_id: int
    tier: int
    resource: int


@dataclass(frozen=True)
class SimConfig:
    environment: Environment
    strategy: Strategy
    penalty: PenaltyModel
    reoptimize_every: int = 5

    def __post_init__(self):
        if self.reoptimize_every < 1:
            raise ValueError("reoptimize_every must be at least 1")
        if self.strategy.weights is not None:
            for m in self.environment.resources_per_tier:
                if m != len(self.strategy.weights):
                    raise ValueError("strategy weights must match each tier's resource count")


@dataclass
class EpochRecord:
    """One re-optimization: which tier, when, and the GA run it produced."""

    tier: int
    time: float
    run: GaRun


@dataclass
class SimResult:
    jobs: list
    total_waiting: float
    total_penalty_sum: float
    total_penalty_aggregate: float
    mean_wait: float
    max_wait: float
    epochs: list = field(default_factory=list)


@dataclass
class StrategyOutcome:
    strategy: Strategy
    result: SimResult
    improvement_vs_worst_pct: float = 0.0


@dataclass
class ExperimentReport:
    outcomes: list


def _epoch_seed(base: int, tier: int, index: int) -> int:
    # any fixed mixing works; only determinism matters
    return (base + 7919 * (tier + 1) + 104729 * index) % (2 ** 32)


def run_sim(jobs, config: SimConfig) -> SimResult:
    """Simulate the given jobs end to end; deterministic for given inputs.

    Input jobs only need their tier-1 arrival and per-tier execution
    times; they are copied, never mutated.  Simultaneous events process
    service completions first, then arrivals, then re-optimizations, with
    the job id breaking mid-kind ties.
    """
    env = config.environment
    num_tiers = env.num_tiers
    for job in jobs:
        if len(job.exec_times) != num_tiers:
            raise ValueError("job %r has %d execution times for %d tiers"
                             % (job.id, len(job.exec_times), num_tiers))
        if job.arrivals[0] is None:
            raise ValueError("job %r has no tier-1 arrival" % (job.id,))
    ids = [job.id for job in jobs]
    if len(ids) != len(set(ids)):
        raise ValueError("job ids must be unique")
    arrivals0 = [job.arrivals[0] for job in jobs]
    if any(b < a for a, b in zip(arrivals0, arrivals0[1:])):
        raise ValueError("jobs must be sorted by tier-1 arrival")

    jobs = [job.clone_fresh() for job in jobs]
    by_id = {job.id: job for job in jobs}
    strategy = config.strategy
    is_ga = strategy.kind in GA_KINDS

    queues = [[deque() for _ in range(m)] for m in env.resources_per_tier]
    in_service = [[None] * m for m in env.resources_per_tier]
    busy_abs = [[0.0] * m for m in env.resources_per_tier]
    cursors = [WrrCursor.for_queues(m, strategy.weights) for m in env.resources_per_tier]
    arrival_count = [0] * num_tiers
    epoch_count = [0] * num_tiers
    epochs = []

    heap = []
    seq = 0

    def push(time, kind, tiebreak, job_id, tier, resource=-1):
        nonlocal seq
        heapq.heappush(heap, Event(time, kind, tiebreak, seq, job_id, tier, resource))
        seq += 1

    def start_service(job, tier, k, now):
        job.waits[tier] = now - job.arrivals[tier]
        in_service[tier][k] = job.id
        done = now + job.exec_times[tier]
        busy_abs[tier][k] = done
        push(done, SERVICE_COMPLETE, job.id, job.id, tier, k)

    def dispatch(job, tier, now):
        if strategy.kind == WRR:
            k, cursors[tier] = dispatch_wrr(None, job, cursors[tier])
        else:
            # wlc and both GA kinds join the least loaded queue
            loads = [len(q) + (1 if in_service[tier][i] is not None else 0)
                     for i, q in enumerate(queues[tier])]
            weights = strategy.weights if strategy.kind == WLC else None
            k = _wlc_pick(loads, weights)
        if in_service[tier][k] is None:
            start_service(job, tier, k, now)
        else:
            queues[tier][k].append(job.id)

    def reoptimize(tier, now):
        waiting = sum(len(q) for q in queues[tier])
        if waiting < 2:
            return
        exec_of = {j: by_id[j].exec_times[tier] for q in queues[tier] for j in q}
        busy = tuple(max(0.0, busy_abs[tier][k] - now) if in_service[tier][k] is not None else 0.0
                     for k in range(len(queues[tier])))
        snapshot = TierSnapshot(tier_index=tier + 1,
                                queues=tuple(tuple(q) for q in queues[tier]),
                                exec_of=exec_of, busy_until=busy)
        ga_config = GaConfig(population_size=strategy.ga.population_size,
                             max_generations=strategy.ga.max_generations,
                             operator_rate=strategy.ga.operator_rate,
                             seed=_epoch_seed(strategy.ga.seed, tier, epoch_count[tier]))
        if strategy.kind == VIRTUAL_GA:
            run = run_ga(snapshot, ga_config)
        else:
            run = run_segmented_ga(snapshot, ga_config)
        for k, seg in enumerate(run.best_order.segments()):
            queues[tier][k] = deque(seg)
        epochs.append(EpochRecord(tier=tier + 1, time=now, run=run))
        epoch_count[tier] += 1
        # a migrated job may now head an idle resource's queue
        for k in range(len(queues[tier])):
            if in_service[tier][k] is None and queues[tier][k]:
                start_service(by_id[queues[tier][k].popleft()], tier, k, now)

    for job in jobs:
        push(job.arrivals[0], ARRIVAL, job.id, job.id, 0)

    while heap:
        ev = heapq.heappop(heap)
        now = ev.time
        if ev.kind == ARRIVAL:
            job = by_id[ev.job_id]
            job.arrivals[ev.tier] = now
            dispatch(job, ev.tier, now)
            arrival_count[ev.tier] += 1
            if is_ga and arrival_count[ev.tier] % config.reoptimize_every == 0:
                push(now, REOPTIMIZE, ev.tier, -1, ev.tier)
        elif ev.kind == SERVICE_COMPLETE:
            job = by_id[ev.job_id]
            tier, k = ev.tier, ev.resource
            job.departures[tier] = now
            in_service[tier][k] = None
            if queues[tier][k]:
                start_service(by_id[queues[tier][k].popleft()], tier, k, now)
            if tier + 1 < num_tiers:
                push(now, ARRIVAL, job.id, job.id, tier + 1)
        else:
            reoptimize(ev.tier, now)

    for job in jobs:
        if any(d is None for d in job.departures):
            raise RuntimeError("job %r never left the system" % (job.id,))

    per_job = [sum(job.waits) for job in jobs]
    total = sum(per_job)
    return SimResult(jobs=jobs,
                     total_waiting=total,
                     total_penalty_sum=sum(job_penalty(config.penalty, w) for w in per_job),
                     total_penalty_aggregate=job_penalty(config.penalty, total),
                     mean_wait=total / len(jobs),
                     max_wait=max(per_job),
                     epochs=epochs)


def compare_strategies(jobs, configs) -> ExperimentReport:
    """Run each strategy on the identical workload and rank the outcomes.

    All configs must share the environment and penalty model; improvement
    percentages are relative to the worst strategy's total waiting.
    """
    if not configs:
        raise ValueError("compare_strategies needs at least one config")
    env, pen = configs[0].environment, configs[0].penalty
    for c in configs[1:]:
        if c.environment != env or c.penalty != pen:
            raise ValueError("all configs must share environment and penalty model")
    outcomes = [StrategyOutcome(strategy=c.strategy, result=run_sim(jobs, c))
                for c in configs]
    worst = max(o.result.total_waiting for o in outcomes)
    for o in outcomes:
        if worst > 0:
            o.improvement_vs_worst_pct = 100.0 * (worst - o.result.total_waiting) / worst
    return ExperimentReport(outcomes=outcomes)

"""Domain model: jobs, tier snapshots, virtual queues and the SLA penalty curve.

A tier is a bank of parallel resources, each with its own waiting queue.
The optimizer works on a snapshot of one tier: the jobs currently waiting
in each queue plus the remaining busy time of each resource.  A virtual
queue is the concatenation of the per-resource queues into a single
permutation; segment boundaries record where one queue ends and the next
begins, so reordering the permutation can move a job between resources.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class Job:
    """One unit of work travelling through the tiers.

    Per-tier timestamps are filled in as the job progresses: arrivals[j]
    when it reaches tier j, waits[j] when it enters service there and
    departures[j] when it leaves.  Unvisited tiers hold None.
    """

    id: int
    exec_times: tuple[float, ...]
    arrivals: list
    waits: list
    departures: list

    def __post_init__(self):
        self.exec_times = tuple(float(e) for e in self.exec_times)
        if not self.exec_times:
            raise ValueError("job %r has no execution times" % (self.id,))
        for e in self.exec_times:
            if not (e > 0 and math.isfinite(e)):
                raise ValueError("job %r has a non-positive execution time %r" % (self.id, e))

    @classmethod
    def create(cls, job_id: int, exec_times, arrival=None) -> "Job":
        """Build a fresh job with empty per-tier records (tier-1 arrival optional)."""
        n = len(exec_times)
        arrivals = [None] * n
        if arrival is not None:
            arrivals[0] = float(arrival)
        return cls(id=job_id, exec_times=tuple(exec_times), arrivals=arrivals,
                   waits=[None] * n, departures=[None] * n)

    def clone_fresh(self) -> "Job":
        """Copy with only the tier-1 arrival kept; used to rerun the same workload."""
        return Job.create(self.id, self.exec_times, self.arrivals[0])


@dataclass(frozen=True)
class Environment:
    """Static shape of the system: how many tiers, how many resources in each."""

    num_tiers: int
    resources_per_tier: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "resources_per_tier", tuple(int(m) for m in self.resources_per_tier))
        if self.num_tiers < 1:
            raise ValueError("need at least one tier")
        if len(self.resources_per_tier) != self.num_tiers:
            raise ValueError("resources_per_tier must list one count per tier")
        if any(m < 1 for m in self.resources_per_tier):
            raise ValueError("every tier needs at least one resource")


@dataclass(frozen=True)
class PenaltyModel:
    """Saturating SLA penalty: rho(w) = chi * (1 - exp(-nu * w))."""

    chi: float = 1.0
    nu: float = 0.01

    def __post_init__(self):
        if not (self.chi > 0 and math.isfinite(self.chi)):
            raise ValueError("chi must be positive and finite")
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError("nu must be positive and finite")


@dataclass(frozen=True)
class TierSnapshot:
    """Waiting jobs of one tier at an instant, per resource queue.

    queues[k] lists the ids waiting at resource k in service order; a job
    already in service is not part of any queue, it only shows up through
    busy_until[k], the remaining time before resource k frees up.
    """

    tier_index: int
    queues: tuple
    exec_of: dict
    busy_until: tuple

    def __post_init__(self):
        object.__setattr__(self, "queues", tuple(tuple(int(j) for j in q) for q in self.queues))
        object.__setattr__(self, "exec_of", {int(j): float(e) for j, e in self.exec_of.items()})
        object.__setattr__(self, "busy_until", tuple(float(b) for b in self.busy_until))
        if len(self.busy_until) != len(self.queues):
            raise ValueError("busy_until must carry one entry per queue")
        if any(b < 0 for b in self.busy_until):
            raise ValueError("busy_until entries cannot be negative")
        ids = [j for q in self.queues for j in q]
        if len(ids) != len(set(ids)):
            raise ValueError("a job id appears in more than one queue position")
        if set(ids) != set(self.exec_of):
            raise ValueError("exec_of must cover exactly the queued job ids")
        for j, e in self.exec_of.items():
            if not (e > 0 and math.isfinite(e)):
                raise ValueError("job %r has a non-positive execution time %r" % (j, e))

    @property
    def num_queues(self) -> int:
        return len(self.queues)

    @property
    def num_jobs(self) -> int:
        return sum(len(q) for q in self.queues)


@dataclass(frozen=True)
class VirtualQueue:
    """All queues of a tier cascaded into one permutation of job ids.

    boundaries holds the M-1 cut positions splitting the permutation back
    into per-resource segments; segment k runs from boundaries[k-1] to
    boundaries[k].  Boundaries stay fixed while the order is optimized, so
    segment sizes always match the snapshot's queue lengths and a job
    migrates queues by crossing a cut.
    """

    order: tuple
    boundaries: tuple

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(j) for j in self.order))
        object.__setattr__(self, "boundaries", tuple(int(b) for b in self.boundaries))
        n = len(self.order)
        prev = 0
        for b in self.boundaries:
            if b < prev or b > n:
                raise ValueError("boundaries must be non-decreasing cut positions within the order")
            prev = b

    @classmethod
    def from_snapshot(cls, snapshot: TierSnapshot) -> "VirtualQueue":
        """Cascade the snapshot's queues in resource order."""
        order = [j for q in snapshot.queues for j in q]
        cuts = []
        pos = 0
        for q in snapshot.queues[:-1]:
            pos += len(q)
            cuts.append(pos)
        return cls(order=tuple(order), boundaries=tuple(cuts))

    def segments(self) -> tuple:
        """Split the order back into per-resource segments."""
        out = []
        start = 0
        for b in self.boundaries:
            out.append(self.order[start:b])
            start = b
        out.append(self.order[start:])
        return tuple(out)


def total_exec_time(job: Job) -> float:
    """Total service demand of a job across all tiers."""
    return sum(job.exec_times)


def response_time(job: Job) -> float:
    """End-to-end response time: all waits plus all execution times."""
    if any(w is None for w in job.waits):
        raise ValueError("job %r has unset per-tier waits" % (job.id,))
    return sum(job.waits) + sum(job.exec_times)


def job_penalty(model: PenaltyModel, total_wait: float) -> float:
    """SLA penalty for a given accumulated waiting time.

    Zero at zero wait, monotonically increasing, saturating at chi.
    """
    if not (total_wait >= 0):
        raise ValueError("waiting time cannot be negative: %r" % (total_wait,))
    return model.chi * (1.0 - math.exp(-model.nu * total_wait))


def total_penalty(model: PenaltyModel, jobs) -> float:
    """Sum of per-job penalties, each on the job's own accumulated wait."""
    total = 0.0
    for job in jobs:
        if any(w is None for w in job.waits):
            raise ValueError("job %r has unset per-tier waits" % (job.id,))
        total += job_penalty(model, sum(job.waits))
    return total


def _check_vq(snapshot: TierSnapshot, vq: VirtualQueue) -> None:
    segs = vq.segments()
    if len(segs) != snapshot.num_queues:
        raise ValueError("virtual queue has %d segments, snapshot has %d queues"
                         % (len(segs), snapshot.num_queues))
    for k, (seg, q) in enumerate(zip(segs, snapshot.queues)):
        if len(seg) != len(q):
            raise ValueError("segment %d holds %d jobs, queue %d holds %d"
                             % (k, len(seg), k, len(q)))
    if len(vq.order) != len(set(vq.order)):
        raise ValueError("virtual queue order repeats a job id")
    if set(vq.order) != set(snapshot.exec_of):
        raise ValueError("virtual queue order is not a permutation of the snapshot's jobs")


def evaluate_waiting(snapshot: TierSnapshot, vq: VirtualQueue):
    """Waiting time each job would accumulate under the given ordering.

    A job at position p of segment k waits for the resource's remaining
    busy time plus the execution of every job ahead of it in the segment.
    Returns (total_waiting, {job_id: wait}).
    """
    _check_vq(snapshot, vq)
    waits = {}
    total = 0.0
    for k, seg in enumerate(vq.segments()):
        t = snapshot.busy_until[k]
        for j in seg:
            waits[j] = t
            total += t
            t += snapshot.exec_of[j]
    return total, waits


def apply_schedule(snapshot: TierSnapshot, vq: VirtualQueue) -> TierSnapshot:
    """Rebuild the snapshot with queues reordered to match the virtual queue."""
    _check_vq(snapshot, vq)
    return TierSnapshot(tier_index=snapshot.tier_index,
                        queues=vq.segments(),
                        exec_of=dict(snapshot.exec_of),
                        busy_until=snapshot.busy_until)

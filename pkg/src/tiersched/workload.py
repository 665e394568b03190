"""Workload generation and the recorded-snapshot fixture format.

Generated workloads draw Poisson arrivals and exponential service demands
from a seeded generator (Mersenne Twister via random.Random), both through
the inverse CDF -ln(u)/rate with u uniform in (0, 1), so a seed pins the
whole job list.

Fixture files record one tier snapshot in a line-oriented format:

    tier <j> queues <M>
    queue <k> busy <t> jobs <id:exec,id:exec,...>

with one queue line per resource, k counted from 1.  An empty queue ends
after the bare word jobs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import Job, TierSnapshot


class FixtureError(ValueError):
    """Raised when a fixture file does not parse; carries path and line."""

    def __init__(self, path, lineno, message):
        super().__init__("%s:%d: %s" % (path, lineno, message))
        self.path = str(path)
        self.lineno = lineno


@dataclass(frozen=True)
class WorkloadConfig:
    arrival_rate: float
    service_rate: float
    num_jobs: int
    num_tiers: int
    seed: int = 0

    def __post_init__(self):
        if not (self.arrival_rate > 0 and math.isfinite(self.arrival_rate)):
            raise ValueError("arrival_rate must be positive and finite")
        if not (self.service_rate > 0 and math.isfinite(self.service_rate)):
            raise ValueError("service_rate must be positive and finite")
        if self.num_jobs < 1:
            raise ValueError("num_jobs must be at least 1")
        if self.num_tiers < 1:
            raise ValueError("num_tiers must be at least 1")


def _exp_draw(rng: random.Random, rate: float) -> float:
    # inverse CDF on u in (0,1); redraw the measure-zero u == 0 so times stay positive
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return -math.log(u) / rate


def generate(config: WorkloadConfig) -> list:
    """Seeded job list: ids in arrival order, strictly increasing arrivals."""
    rng = random.Random(config.seed)
    jobs = []
    clock = 0.0
    for i in range(config.num_jobs):
        clock += _exp_draw(rng, config.arrival_rate)
        execs = tuple(_exp_draw(rng, config.service_rate) for _ in range(config.num_tiers))
        jobs.append(Job.create(i + 1, execs, arrival=clock))
    return jobs


def save_fixture(path, snapshot: TierSnapshot) -> None:
    """Write a snapshot in the fixture format; load_fixture inverts it byte for byte."""
    lines = ["tier %d queues %d" % (snapshot.tier_index, snapshot.num_queues)]
    for k, queue in enumerate(snapshot.queues):
        jobs = ",".join("%d:%s" % (j, repr(snapshot.exec_of[j])) for j in queue)
        line = "queue %d busy %s jobs" % (k + 1, repr(snapshot.busy_until[k]))
        if jobs:
            line += " " + jobs
        lines.append(line)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_fixture(path) -> TierSnapshot:
    """Parse a recorded tier snapshot, failing loudly with file:line context."""
    with open(path) as fh:
        raw = fh.read().splitlines()
    lines = [(i + 1, line.strip()) for i, line in enumerate(raw) if line.strip()]
    if not lines:
        raise FixtureError(path, 1, "empty fixture file")

    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 4 or parts[0] != "tier" or parts[2] != "queues":
        raise FixtureError(path, lineno, "expected 'tier <j> queues <M>', got %r" % header)
    try:
        tier_index = int(parts[1])
        num_queues = int(parts[3])
    except ValueError:
        raise FixtureError(path, lineno, "tier and queue counts must be integers")
    if num_queues < 1:
        raise FixtureError(path, lineno, "queue count must be at least 1")
    if len(lines) - 1 != num_queues:
        raise FixtureError(path, lineno, "header announces %d queues, file has %d queue lines"
                           % (num_queues, len(lines) - 1))

    queues = []
    busy = []
    exec_of = {}
    for expect_k, (lineno, line) in enumerate(lines[1:], start=1):
        parts = line.split()
        if len(parts) not in (5, 6) or parts[0] != "queue" or parts[2] != "busy" or parts[4] != "jobs":
            raise FixtureError(path, lineno, "expected 'queue <k> busy <t> jobs <id:exec,...>', got %r" % line)
        try:
            k = int(parts[1])
        except ValueError:
            raise FixtureError(path, lineno, "queue index must be an integer")
        if k != expect_k:
            raise FixtureError(path, lineno, "queue lines must be in order; expected queue %d" % expect_k)
        try:
            busy.append(float(parts[3]))
        except ValueError:
            raise FixtureError(path, lineno, "busy time %r is not a number" % parts[3])
        ids = []
        if len(parts) == 6:
            for entry in parts[5].split(","):
                if ":" not in entry:
                    raise FixtureError(path, lineno, "job entry %r is not id:exec" % entry)
                id_part, exec_part = entry.split(":", 1)
                try:
                    job_id = int(id_part)
                    exec_time = float(exec_part)
                except ValueError:
                    raise FixtureError(path, lineno, "job entry %r is not id:exec" % entry)
                if job_id in exec_of:
                    raise FixtureError(path, lineno, "job id %d appears twice" % job_id)
                exec_of[job_id] = exec_time
                ids.append(job_id)
        queues.append(tuple(ids))

    try:
        return TierSnapshot(tier_index=tier_index, queues=tuple(queues),
                            exec_of=exec_of, busy_until=tuple(busy))
    except ValueError as exc:
        raise FixtureError(path, lines[0][0], str(exc))

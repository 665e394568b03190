"""Shared helpers for the test suite.

The waiting-time oracles here are written independently of the library:
they replay queues job by job instead of calling the library's kernel,
so the two implementations check each other.
"""

from __future__ import annotations

import itertools
import random

from tiersched.model import TierSnapshot, VirtualQueue


def make_snapshot(queue_execs, busy=None, tier_index=1, first_id=1):
    """Build a snapshot from a list of per-queue exec-time lists."""
    queues, exec_of = [], {}
    next_id = first_id
    for execs in queue_execs:
        q = []
        for e in execs:
            exec_of[next_id] = float(e)
            q.append(next_id)
            next_id += 1
        queues.append(tuple(q))
    if busy is None:
        busy = [0.0] * len(queue_execs)
    return TierSnapshot(tier_index=tier_index, queues=tuple(queues),
                        exec_of=exec_of, busy_until=tuple(float(b) for b in busy))


def random_snapshot(rng: random.Random, max_queues=3, max_jobs=12,
                    busy_max=0.0, min_jobs=2, exact_queues=None):
    """Random snapshot; busy_max > 0 adds random in-service remainders."""
    m = exact_queues if exact_queues is not None else rng.randint(1, max_queues)
    n = rng.randint(min_jobs, max_jobs)
    sizes = [0] * m
    for _ in range(n):
        sizes[rng.randrange(m)] += 1
    queue_execs = [[round(rng.uniform(0.1, 9.9), 3) for _ in range(s)]
                   for s in sizes]
    busy = [round(rng.uniform(0.0, busy_max), 3) if busy_max else 0.0
            for _ in range(m)]
    return make_snapshot(queue_execs, busy)


def replay_waiting(snapshot, vq):
    """Cumulative replay of each segment; independent of the library kernel."""
    waits = {}
    for k, segment in enumerate(vq.segments()):
        t = snapshot.busy_until[k]
        for job in segment:
            waits[job] = t
            t += snapshot.exec_of[job]
    return sum(waits.values()), waits


def replay_initial(snapshot):
    return replay_waiting(snapshot, VirtualQueue.from_snapshot(snapshot))[0]


def spt_total(execs, busy=0.0):
    """Optimal single-queue total waiting: shortest execution time first."""
    total, t = 0.0, busy
    for e in sorted(execs):
        total += t
        t += e
    return total


def segmented_optimum(snapshot):
    """Best total waiting when jobs cannot change queues: per-queue SPT."""
    return sum(spt_total([snapshot.exec_of[j] for j in q],
                         snapshot.busy_until[k])
               for k, q in enumerate(snapshot.queues))


def enumerate_optimum(snapshot):
    """Exhaustive minimum total waiting over every virtual-queue ordering."""
    ids = [j for q in snapshot.queues for j in q]
    execs = [snapshot.exec_of[j] for j in ids]
    sizes = [len(q) for q in snapshot.queues]
    busy = snapshot.busy_until
    best = None
    for perm in itertools.permutations(range(len(ids))):
        total, pos = 0.0, 0
        for k, size in enumerate(sizes):
            t = busy[k]
            for p in range(pos, pos + size):
                total += t
                t += execs[perm[p]]
            pos += size
        if best is None or total < best:
            best = total
    return best

"""Acceptance suite: whole-system checks against the bundled reference
tables and closed-form oracles.

Each test gathers its evidence first and then records a single numbered
verdict through _verdict, so the terminal summary always carries one
pass/fail line per criterion.  The strategy-ranking experiment dominates
the runtime (several minutes of paired simulations); everything else
finishes in seconds.
"""

import random
import statistics

from click.testing import CliRunner

from tiersched import reference
from tiersched.cli import main
from tiersched.ga import GaConfig, run_ga
from tiersched.model import Environment, PenaltyModel, job_penalty
from tiersched.policies import Strategy
from tiersched.sim import SimConfig, compare_strategies, run_sim
from tiersched.workload import WorkloadConfig, generate, load_fixture

from util import (
    enumerate_optimum,
    make_snapshot,
    random_snapshot,
    replay_initial,
    replay_waiting,
    segmented_optimum,
    spt_total,
)

RESULTS = {}


def _verdict(criterion, ok, detail=""):
    RESULTS[criterion] = (bool(ok), detail)
    assert ok, "criterion %d failed: %s" % (criterion, detail)


def _queue_replay(snapshot, k):
    # one queue replayed on its own, independent of the library kernel
    total, t = 0.0, snapshot.busy_until[k]
    for j in snapshot.queues[k]:
        total += t
        t += snapshot.exec_of[j]
    return total


def _improvement_pct(run):
    return 100.0 * (run.initial_fitness - run.best_fitness) / run.initial_fitness


def _bootstrap_p5(gaps, rng, resamples=10000):
    # fifth percentile of the resampled mean; > 0 means the gap is
    # positive at a one-sided 95% level
    n = len(gaps)
    means = sorted(
        sum(gaps[rng.randrange(n)] for _ in range(n)) / n
        for _ in range(resamples)
    )
    return means[resamples // 20]


def test_penalty_arithmetic_reproduces_reference_tables():
    """Criterion 1: every reference penalty follows from its waiting value."""
    model = PenaltyModel()
    pairs = []
    for inst in reference.TIER_INSTANCES + reference.QUEUE_INSTANCES:
        pairs.append((inst.initial_waiting, inst.initial_penalty))
        pairs.append((inst.reference_waiting, inst.reference_penalty))
    worst = max(abs(job_penalty(model, w) - p) for w, p in pairs)
    _verdict(1, worst <= 0.001,
             "%d penalty values, max deviation %.6f" % (len(pairs), worst))


def test_fixtures_are_exact_and_tables_are_byte_stable(tmp_path):
    """Criterion 2: fixtures replay the reference initial waitings exactly
    and reproduce-tables is byte-stable across runs."""
    bad = []
    for inst in reference.TIER_INSTANCES:
        got = replay_initial(load_fixture(reference.fixture_path(inst.fixture)))
        if abs(got - inst.initial_waiting) > 1e-9 or ("%.4f" % got) != ("%.4f" % inst.initial_waiting):
            bad.append("%s: %r != %r" % (inst.fixture, got, inst.initial_waiting))
    for inst in reference.QUEUE_INSTANCES:
        snap = load_fixture(reference.fixture_path(inst.fixture))
        got = _queue_replay(snap, inst.queue_index)
        if abs(got - inst.initial_waiting) > 1e-9 or ("%.4f" % got) != ("%.4f" % inst.initial_waiting):
            bad.append("%s[%d]: %r != %r" % (inst.fixture, inst.queue_index, got, inst.initial_waiting))

    runner = CliRunner()
    contents = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        res = runner.invoke(main, ["reproduce-tables", "--out", str(out),
                                   "--seed", "0", "--generations", "3", "--no-plots"],
                            catch_exceptions=False)
        if res.exit_code != 0:
            bad.append("reproduce-tables exited %d" % res.exit_code)
            break
        contents.append({p.name: p.read_bytes() for p in out.iterdir()})
    if len(contents) == 2 and contents[0] != contents[1]:
        bad.append("reproduce-tables runs differ")
    _verdict(2, not bad,
             "; ".join(bad) if bad else "12 initial waitings exact, 2 runs byte-identical")


def test_optimizer_reaches_reference_improvements_on_tier_fixtures():
    """Criterion 3: on each whole-tier fixture the optimizer lands within
    10 percentage points of the reference improvement in >= 18 of 20 seeds."""
    per_fixture = []
    ok = True
    for inst in reference.TIER_INSTANCES:
        snap = load_fixture(reference.fixture_path(inst.fixture))
        floor = inst.waiting_improvement_pct - 10.0
        hits = 0
        for seed in range(20):
            run = run_ga(snap, GaConfig(10, inst.generations, 1.0, seed))
            if _improvement_pct(run) >= floor:
                hits += 1
        per_fixture.append("%s %d/20" % (inst.fixture, hits))
        ok = ok and hits >= 18
    _verdict(3, ok, "; ".join(per_fixture))


def test_optimizer_attains_enumerated_optimum_on_small_snapshots():
    """Criterion 4: on brute-forceable snapshots the optimizer finds the
    enumerated optimum in >= 95% of (snapshot, seed) pairs, never beats it."""
    rng = random.Random(404)
    hits = beats = total = 0
    for i in range(50):
        snap = random_snapshot(rng, max_jobs=9, min_jobs=2, exact_queues=3)
        best = enumerate_optimum(snap)
        for seed in (i, 1000 + i):
            run = run_ga(snap, GaConfig(10, 500, 1.0, seed))
            total += 1
            if run.best_fitness < best - 1e-9:
                beats += 1
            elif abs(run.best_fitness - best) <= 1e-9:
                hits += 1
    _verdict(4, hits >= round(0.95 * total) and beats == 0,
             "%d/%d optima attained, %d below enumeration" % (hits, total, beats))


def test_optimizer_matches_spt_on_single_queues():
    """Criterion 5: single-queue runs converge to exactly the
    shortest-exec-first waiting in >= 95% of cases."""
    rng = random.Random(505)
    hits = total = 0
    for i in range(100):
        n = rng.randint(2, 30)
        execs = [round(rng.expovariate(1.0) + 0.01, 4) for _ in range(n)]
        busy = round(rng.uniform(0.0, 3.0), 4) if rng.random() < 0.5 else 0.0
        snap = make_snapshot([execs], busy=[busy])
        run = run_ga(snap, GaConfig(10, 500, 1.0, i))
        total += 1
        if run.best_fitness == spt_total(execs, busy):
            hits += 1
    _verdict(5, hits >= round(0.95 * total), "%d/%d exact SPT matches" % (hits, total))


def test_whole_tier_optimum_never_exceeds_segmented_optimum():
    """Criterion 6: the whole-tier optimum is at most the best the
    per-queue subspace can reach, on every brute-forceable instance."""
    rng = random.Random(606)
    worst_gap = 0.0
    cases = 0
    for _ in range(40):
        snap = random_snapshot(rng, max_queues=3, max_jobs=9, busy_max=2.0, min_jobs=2)
        worst_gap = max(worst_gap, enumerate_optimum(snap) - segmented_optimum(snap))
        cases += 1
    _verdict(6, worst_gap <= 1e-9,
             "%d instances, max(whole-tier - segmented) = %.3g" % (cases, worst_gap))


def test_strategy_ranking_over_paired_replications():
    """Criterion 7: over 20 paired replications of the congested two-tier
    experiment, mean total waiting orders virtual_ga < segmented_ga <
    wlc < wrr with every adjacent gap positive at a one-sided 95% level."""
    env = Environment(2, (3, 3))
    ga = GaConfig(10, 200, 1.0, 0)
    kinds = ("virtual_ga", "segmented_ga", "wlc", "wrr")
    configs = [SimConfig(environment=env,
                         strategy=Strategy(kind, ga=ga if kind.endswith("_ga") else None),
                         penalty=PenaltyModel(),
                         reoptimize_every=1)
               for kind in kinds]
    totals = {kind: [] for kind in kinds}
    for rep in range(20):
        jobs = generate(WorkloadConfig(2.85, 1.0, 400, 2, seed=2000 + rep))
        report = compare_strategies(jobs, configs)
        for kind, outcome in zip(kinds, report.outcomes):
            totals[kind].append(outcome.result.total_waiting)
    means = [statistics.mean(totals[kind]) for kind in kinds]
    ordered = all(a < b for a, b in zip(means, means[1:]))
    rng = random.Random(12345)
    p5s = [_bootstrap_p5([hi - lo for lo, hi in zip(totals[a], totals[b])], rng)
           for a, b in zip(kinds, kinds[1:])]
    _verdict(7, ordered and all(p > 0.0 for p in p5s),
             "means %s; gap P5 %s" % ("/".join("%.0f" % m for m in means),
                                      "/".join("%+.1f" % p for p in p5s)))


def test_single_server_queue_matches_closed_form():
    """Criterion 8: the M/M/1 reduction reproduces the closed-form mean
    queue wait lam/(mu(mu-lam)) within 10%."""
    lam, mu = 0.5, 1.0
    jobs = generate(WorkloadConfig(lam, mu, 200000, 1, seed=8080))
    config = SimConfig(environment=Environment(1, (1,)), strategy=Strategy("wrr"),
                       penalty=PenaltyModel())
    result = run_sim(jobs, config)
    expected = lam / (mu * (mu - lam))
    rel = abs(result.mean_wait - expected) / expected
    _verdict(8, rel <= 0.10,
             "mean wait %.4f vs %.4f, off by %.1f%%" % (result.mean_wait, expected, 100 * rel))


def test_invariants_hold_on_randomized_cases():
    """Criterion 9: permutation validity, monotone traces, conservation
    laws and seed determinism across 1,000 randomized cases."""
    bad = []
    cases = 0

    def flag(msg):
        if len(bad) < 8:
            bad.append(msg)

    # optimizer: every individual of every generation is a permutation of
    # the snapshot's job ids, the trace never rises, and the returned best
    # matches an independent replay
    rng = random.Random(909)
    for i in range(250):
        snap = random_snapshot(rng, max_jobs=10, busy_max=2.0, min_jobs=1)
        all_ids = sorted(j for q in snap.queues for j in q)
        config = GaConfig(rng.randint(4, 8), rng.randint(5, 30),
                          rng.choice([0.2, 0.5, 1.0]), i)
        generations = []

        def on_generation(gen, orders, fits, _ids=all_ids, _seen=generations):
            _seen.append(gen)
            for order in orders:
                if sorted(order) != _ids:
                    flag("ga case %d gen %d: invalid permutation" % (len(_seen), gen))

        run = run_ga(snap, config, on_generation=on_generation)
        bests = [b for _, b in run.trace]
        if not generations:
            flag("ga case %d: callback never fired" % i)
        if any(b2 > b1 + 1e-12 for b1, b2 in zip(bests, bests[1:])):
            flag("ga case %d: trace rises" % i)
        if bests[-1] != run.best_fitness or run.best_fitness > run.initial_fitness + 1e-12:
            flag("ga case %d: best inconsistent with trace or start" % i)
        if abs(replay_waiting(snap, run.best_order)[0] - run.best_fitness) > 1e-9:
            flag("ga case %d: replay disagrees" % i)
        cases += 1

    # optimizer determinism: identical config, identical outcome
    rng = random.Random(910)
    for i in range(100):
        snap = random_snapshot(rng, max_jobs=12, busy_max=1.0, min_jobs=2)
        config = GaConfig(6, 40, 1.0, 5000 + i)
        a = run_ga(snap, config)
        b = run_ga(snap, config)
        if a.best_order != b.best_order or a.trace != b.trace:
            flag("ga determinism case %d" % i)
        cases += 1

    # simulator: jobs conserved, timestamps causal, tier hand-offs exact,
    # totals consistent with the per-job records
    rng = random.Random(911)
    kinds = ("wrr", "wlc", "virtual_ga", "segmented_ga")
    for i in range(350):
        tiers = rng.randint(1, 2)
        env = Environment(tiers, tuple(rng.randint(1, 3) for _ in range(tiers)))
        n = rng.randint(5, 40)
        jobs = generate(WorkloadConfig(rng.uniform(0.8, 3.0), 1.0, n, tiers, seed=3000 + i))
        kind = kinds[i % 4]
        strategy = Strategy(kind, ga=GaConfig(5, 10, 1.0, i) if kind.endswith("_ga") else None)
        result = run_sim(jobs, SimConfig(environment=env, strategy=strategy,
                                         penalty=PenaltyModel(),
                                         reoptimize_every=rng.randint(1, 6)))
        if sorted(j.id for j in result.jobs) != sorted(j.id for j in jobs):
            flag("sim case %d: job set changed" % i)
        for job in result.jobs:
            for t in range(tiers):
                if job.waits[t] is None or job.waits[t] < 0:
                    flag("sim case %d job %d: missing or negative wait" % (i, job.id))
                    break
                if abs(job.departures[t] - (job.arrivals[t] + job.waits[t] + job.exec_times[t])) > 1e-9:
                    flag("sim case %d job %d: departure mismatch" % (i, job.id))
                if t and abs(job.arrivals[t] - job.departures[t - 1]) > 1e-9:
                    flag("sim case %d job %d: tier hand-off mismatch" % (i, job.id))
        per_job = sum(sum(j.waits) for j in result.jobs)
        if abs(result.total_waiting - per_job) > 1e-6 * max(1.0, per_job):
            flag("sim case %d: total_waiting inconsistent" % i)
        cases += 1

    # work conservation on a single resource: service starts the moment
    # the server frees up or the job arrives, whichever is later
    rng = random.Random(912)
    for i in range(200):
        jobs = generate(WorkloadConfig(rng.uniform(0.5, 1.5), 1.0,
                                       rng.randint(5, 30), 1, seed=4000 + i))
        result = run_sim(jobs, SimConfig(environment=Environment(1, (1,)),
                                         strategy=Strategy(("wrr", "wlc")[i % 2]),
                                         penalty=PenaltyModel()))
        prev_departure = 0.0
        for job in sorted(result.jobs, key=lambda j: j.arrivals[0]):
            start = job.arrivals[0] + job.waits[0]
            if abs(start - max(job.arrivals[0], prev_departure)) > 1e-9:
                flag("work conservation case %d job %d" % (i, job.id))
            prev_departure = job.departures[0]
        cases += 1

    # simulator determinism: identical inputs, identical trajectories
    rng = random.Random(913)
    for i in range(100):
        tiers = rng.randint(1, 2)
        env = Environment(tiers, tuple(rng.randint(1, 3) for _ in range(tiers)))
        jobs = generate(WorkloadConfig(2.0, 1.0, rng.randint(10, 30), tiers, seed=5000 + i))
        kind = kinds[i % 4]
        strategy = Strategy(kind, ga=GaConfig(5, 8, 1.0, i) if kind.endswith("_ga") else None)
        config = SimConfig(environment=env, strategy=strategy,
                           penalty=PenaltyModel(), reoptimize_every=2)
        a = run_sim(jobs, config)
        b = run_sim(jobs, config)
        if [j.waits for j in a.jobs] != [j.waits for j in b.jobs]:
            flag("sim determinism case %d: waits differ" % i)
        if [(e.tier, e.time, e.run.best_fitness) for e in a.epochs] != \
                [(e.tier, e.time, e.run.best_fitness) for e in b.epochs]:
            flag("sim determinism case %d: epochs differ" % i)
        cases += 1

    _verdict(9, cases >= 1000 and not bad,
             "; ".join(bad) if bad else "%d randomized cases clean" % cases)

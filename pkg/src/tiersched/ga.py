"""Permutation GA over virtual queues: lower total waiting is fitter.

The population holds whole virtual-queue orderings.  Each generation a
small number of single-point crossovers and insert mutations produce new
candidates, the fittest incumbents are carried over unchanged, and the
best ordering found so far is never lost.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import TierSnapshot, VirtualQueue, evaluate_waiting


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 10
    max_generations: int = 500
    operator_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.max_generations < 1:
            raise ValueError("max_generations must be at least 1")
        if not (0.0 < self.operator_rate <= 1.0):
            raise ValueError("operator_rate must be in (0, 1]")


@dataclass
class GaRun:
    """Outcome of one GA run.

    trace records (generation, best-so-far fitness) per generation,
    generation 0 being the initial population; it never increases and its
    last value is best_fitness.  initial_fitness is the waiting of the
    snapshot's own ordering, an upper bound on best_fitness.
    """

    best_order: VirtualQueue
    best_fitness: float
    trace: list
    initial_fitness: float


def fitness(snapshot: TierSnapshot, vq: VirtualQueue) -> float:
    """Total waiting of the ordering; the GA minimizes this."""
    total, _ = evaluate_waiting(snapshot, vq)
    return total


def selection_weights(fitnesses) -> list:
    """Selection probabilities favouring low fitness.

    Weights are the inverted fitnesses f_max + f_min - f_r, renormalized;
    a flat population gets uniform weights.
    """
    fits = list(fitnesses)
    if not fits:
        raise ValueError("selection_weights needs at least one fitness")
    for f in fits:
        if not (f >= 0 and math.isfinite(f)):
            raise ValueError("fitnesses must be non-negative and finite, got %r" % (f,))
    top, bottom = max(fits), min(fits)
    weights = [top + bottom - f for f in fits]
    norm = sum(weights)
    if norm <= 0:
        return [1.0 / len(fits)] * len(fits)
    return [w / norm for w in weights]


def roulette_select(weights, rng: random.Random) -> int:
    """Sample an index from cumulative weight intervals (the wheel spin)."""
    acc = 0.0
    for w in weights:
        if not (w >= 0 and math.isfinite(w)):
            raise ValueError("weights must be non-negative and finite, got %r" % (w,))
        acc += w
    if not math.isclose(acc, 1.0, rel_tol=1e-9, abs_tol=1e-9):
        raise ValueError("weights must sum to 1, got %r" % (acc,))
    spin = rng.random()
    cum = 0.0
    for i, w in enumerate(weights):
        cum += w
        if spin < cum:
            return i
    return len(weights) - 1  # float round-off pushed the spin past the last edge


def single_point_crossover(parent_a, parent_b, cut: int) -> tuple:
    """Keep parent_a up to the cut, fill the rest in parent_b's order.

    The fill skips ids already taken from parent_a, so the child is always
    a valid permutation of the shared id set.
    """
    a, b = tuple(parent_a), tuple(parent_b)
    if set(a) != set(b) or len(a) != len(b):
        raise ValueError("parents must be permutations of the same job ids")
    if not (0 <= cut <= len(a)):
        raise ValueError("cut must lie within the permutation, got %r" % (cut,))
    head = a[:cut]
    taken = set(head)
    return head + tuple(j for j in b if j not in taken)


def insert_mutation(order, src: int, dst: int) -> tuple:
    """Remove the element at src and reinsert it at dst."""
    seq = list(order)
    if not (0 <= src < len(seq)) or not (0 <= dst < len(seq)):
        raise ValueError("mutation positions must index into the order")
    seq.insert(dst, seq.pop(src))
    return tuple(seq)


def _waiting_kernel(order, cuts, execs, busy) -> float:
    # order is a permutation of 0..n-1 indexing execs; cuts ends with n.
    total = 0.0
    start = 0
    for k, end in enumerate(cuts):
        t = busy[k]
        for p in range(start, end):
            total += t
            t += execs[order[p]]
        start = end
    return total


def run_ga(snapshot: TierSnapshot, config: GaConfig, on_generation=None) -> GaRun:
    """Optimize the snapshot's virtual queue ordering.

    The initial population is the snapshot's own ordering plus random
    permutations.  Per generation, ceil(operator_rate * population_size)
    crossovers (parents drawn by roulette) and as many insert mutations
    (targets drawn uniformly from offspring and population) are applied;
    the next generation keeps the fittest incumbents unchanged to stay at
    population_size, so the best-so-far individual always survives.

    Replacement is elitist: the next population is the fittest
    population_size individuals among the current population, offspring
    and mutants, preferring distinct orderings so the elite does not
    collapse into copies (duplicates fill up only when fewer distinct
    orderings exist).

    on_generation, if given, is called as on_generation(gen, orders, fits)
    with the population of every generation including the initial one.

    Deterministic for a given snapshot and seed.
    """
    incumbent_vq = VirtualQueue.from_snapshot(snapshot)
    ids = incumbent_vq.order
    n = len(ids)
    execs = [snapshot.exec_of[j] for j in ids]
    cuts = list(incumbent_vq.boundaries) + [n]
    busy = snapshot.busy_until
    rng = random.Random(config.seed)

    def evaluate(order):
        return _waiting_kernel(order, cuts, execs, busy)

    def to_ids(order):
        return VirtualQueue(order=tuple(ids[i] for i in order), boundaries=incumbent_vq.boundaries)

    incumbent = tuple(range(n))
    initial_fitness = evaluate(incumbent)

    if n < 2:
        # nothing to reorder; keep the trace shape anyway
        trace = [(g, initial_fitness) for g in range(config.max_generations + 1)]
        if on_generation is not None:
            for g in range(config.max_generations + 1):
                on_generation(g, [to_ids(incumbent).order] * config.population_size,
                              [initial_fitness] * config.population_size)
        return GaRun(best_order=to_ids(incumbent), best_fitness=initial_fitness,
                     trace=trace, initial_fitness=initial_fitness)

    pop = [incumbent]
    base = list(range(n))
    for _ in range(config.population_size - 1):
        perm = base[:]
        rng.shuffle(perm)
        pop.append(tuple(perm))
    fits = [evaluate(p) for p in pop]

    n_ops = math.ceil(config.operator_rate * config.population_size)
    best_idx = min(range(len(pop)), key=lambda r: (fits[r], r))
    best_order, best_fit = pop[best_idx], fits[best_idx]
    trace = [(0, best_fit)]
    if on_generation is not None:
        on_generation(0, [to_ids(p).order for p in pop], list(fits))

    for gen in range(1, config.max_generations + 1):
        weights = selection_weights(fits)
        offspring = []
        for _ in range(n_ops):
            i = roulette_select(weights, rng)
            j = roulette_select(weights, rng)
            cut = rng.randint(0, n)
            offspring.append(single_point_crossover(pop[i], pop[j], cut))
        pool = offspring + pop
        mutants = []
        for _ in range(n_ops):
            target = pool[rng.randrange(len(pool))]
            src = rng.randrange(n)
            dst = rng.randrange(n)
            mutants.append(insert_mutation(target, src, dst))

        candidates = pop + offspring + mutants
        cand_fits = fits + [evaluate(x) for x in offspring + mutants]
        ranked = sorted(range(len(candidates)), key=lambda r: (cand_fits[r], r))
        survivors = []
        seen = set()
        for r in ranked:
            if candidates[r] not in seen:
                seen.add(candidates[r])
                survivors.append(r)
                if len(survivors) == config.population_size:
                    break
        for r in ranked:
            if len(survivors) == config.population_size:
                break
            if r not in survivors:
                survivors.append(r)
        pop = [candidates[r] for r in survivors]
        fits = [cand_fits[r] for r in survivors]

        if fits[0] < best_fit:
            best_fit = fits[0]
            best_order = pop[0]
        trace.append((gen, best_fit))
        if on_generation is not None:
            on_generation(gen, [to_ids(p).order for p in pop], list(fits))

    return GaRun(best_order=to_ids(best_order), best_fitness=best_fit,
                 trace=trace, initial_fitness=initial_fitness)

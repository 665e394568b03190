"""Command line front end.

Four subcommands: `optimize` runs the virtual-queue optimizer on one
snapshot fixture, `reproduce-tables` regenerates the benchmark tables
from the bundled fixtures, `simulate` drives the event simulator from a
config file, and `compare` runs several dispatch strategies over paired
replications. Every run writes its resolved configuration to
manifest.json; feeding that manifest back through --config reproduces
the CSV outputs byte for byte.
"""

from __future__ import annotations

import json
import statistics
import sys
from pathlib import Path

import click

from . import __version__
from . import report
from .ga import GaConfig, run_ga
from .model import (Environment, PenaltyModel, TierSnapshot, job_penalty,
                    response_time)
from .policies import GA_KINDS, STRATEGY_KINDS, Strategy
from .reference import QUEUE_INSTANCES, TIER_INSTANCES, fixture_path
from .sim import SimConfig, compare_strategies, run_sim
from .workload import FixtureError, WorkloadConfig, generate, load_fixture

CONFIG_VERSION = 1

DEFAULTS = {
    "version": CONFIG_VERSION,
    "workload": {"arrival_rate": 2.85, "service_rate": 1.0,
                 "num_jobs": 400, "num_tiers": 2, "seed": 1},
    "environment": {"num_tiers": 2, "resources_per_tier": [3, 3]},
    "penalty": {"chi": 1.0, "nu": 0.01},
    "ga": {"population_size": 10, "max_generations": 500,
           "operator_rate": 0.1, "seed": 0},
    "reoptimize_every": 5,
    "weights": None,
}

COMMAND_KEYS = {
    "optimize": {"fixture"},
    "simulate": {"strategy"},
    "compare": {"strategies", "reps"},
}


class CliError(click.ClickException):
    exit_code = 1


def _load_config(path, command):
    """Read a config (or a manifest wrapping one) and fill in defaults."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError("cannot read config %s: %s" % (path, exc))
    if not isinstance(data, dict):
        raise CliError("config %s: expected a JSON object" % path)
    if isinstance(data.get("config"), dict):
        data = data["config"]      # manifest from a previous run
    version = data.get("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise CliError("config %s: unsupported version %r" % (path, version))
    allowed = set(DEFAULTS) | {"command"} | COMMAND_KEYS.get(command, set())
    unknown = set(data) - allowed
    if unknown:
        raise CliError("config %s: unknown keys %s"
                       % (path, ", ".join(sorted(unknown))))
    merged = {}
    for key, default in DEFAULTS.items():
        if isinstance(default, dict):
            section = dict(default)
            extra = data.get(key, {})
            if not isinstance(extra, dict):
                raise CliError("config %s: %s must be an object" % (path, key))
            bad = set(extra) - set(default)
            if bad:
                raise CliError("config %s: unknown %s keys %s"
                               % (path, key, ", ".join(sorted(bad))))
            section.update(extra)
            merged[key] = section
        else:
            merged[key] = data.get(key, default)
    for key in COMMAND_KEYS.get(command, set()):
        if key in data:
            merged[key] = data[key]
    return merged


def _build_strategy(entry, base_ga, default_weights):
    """Turn a config entry (name or object) into a Strategy."""
    if isinstance(entry, str):
        kind, params = entry, {}
    elif isinstance(entry, dict) and "kind" in entry:
        kind, params = entry["kind"], entry
        bad = set(params) - {"kind", "ga", "weights"}
        if bad:
            raise CliError("strategy %r: unknown keys %s"
                           % (kind, ", ".join(sorted(bad))))
    else:
        raise CliError("strategy entries must be a name or {\"kind\": ...}")
    if kind not in STRATEGY_KINDS:
        raise CliError("unknown strategy %r (choose from %s)"
                       % (kind, ", ".join(STRATEGY_KINDS)))
    try:
        if kind in GA_KINDS:
            ga_params = dict(base_ga)
            ga_params.update(params.get("ga", {}))
            return Strategy(kind, ga=GaConfig(**ga_params))
        weights = params.get("weights", default_weights)
        return Strategy(kind, weights=tuple(weights) if weights else None)
    except (TypeError, ValueError) as exc:
        raise CliError("strategy %r: %s" % (kind, exc))


def _build_sim_config(merged, strategy):
    env_cfg = merged["environment"]
    try:
        env = Environment(env_cfg["num_tiers"],
                          tuple(env_cfg["resources_per_tier"]))
        penalty = PenaltyModel(**merged["penalty"])
        return SimConfig(environment=env, strategy=strategy, penalty=penalty,
                         reoptimize_every=merged["reoptimize_every"])
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc))


def _build_workload(merged, seed_override=None):
    wl = dict(merged["workload"])
    if seed_override is not None:
        wl["seed"] = seed_override
    try:
        return WorkloadConfig(**wl)
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc))


def _resolve_fixture(name):
    """Accept a filesystem path or the name of a bundled fixture."""
    p = Path(name)
    if p.exists():
        return p
    try:
        bundled = fixture_path(name[:-4] if name.endswith(".txt") else name)
    except (FileNotFoundError, ModuleNotFoundError):
        bundled = None
    if bundled is not None and Path(str(bundled)).exists():
        return Path(str(bundled))
    raise CliError("fixture %r not found (no such file or bundled name)" % name)


def _write_manifest(out_dir, command, config, outputs):
    payload = {
        "artifact_version": __version__,
        "command": command,
        "config": config,
        "outputs": sorted(outputs),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


@click.group()
@click.version_option(__version__)
def main():
    """Multi-tier queue scheduling: optimizer, simulator, benchmarks."""


@main.command()
@click.option("--fixture", default=None,
              help="Snapshot fixture: a path or a bundled name.")
@click.option("--generations", type=int, default=None,
              help="Generations to run (default 500).")
@click.option("--pop", type=int, default=None, help="Population size (default 10).")
@click.option("--rate", type=float, default=None,
              help="Operator rate per generation (default 0.1).")
@click.option("--seed", type=int, default=None, help="Optimizer seed (default 0).")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config or manifest supplying the ga section.")
@click.option("--out", default="out/optimize", show_default=True,
              help="Output directory.")
@click.option("--no-plots", is_flag=True, help="Skip figure rendering.")
def optimize(fixture, generations, pop, rate, seed, config_path, out, no_plots):
    """Run the virtual-queue optimizer on one tier snapshot."""
    ga_cfg = dict(DEFAULTS["ga"])
    if config_path is not None:
        merged = _load_config(config_path, "optimize")
        ga_cfg = merged["ga"]
        if fixture is None:
            fixture = merged.get("fixture")
    if fixture is None:
        raise CliError("no fixture given (pass --fixture or a config "
                       "naming one)")
    if generations is not None:
        ga_cfg["max_generations"] = generations
    if pop is not None:
        ga_cfg["population_size"] = pop
    if rate is not None:
        ga_cfg["operator_rate"] = rate
    if seed is not None:
        ga_cfg["seed"] = seed
    path = _resolve_fixture(fixture)
    try:
        snapshot = load_fixture(path)
        config = GaConfig(**ga_cfg)
    except (FixtureError, TypeError, ValueError) as exc:
        raise CliError(str(exc))
    run = run_ga(snapshot, config)
    model = PenaltyModel()
    initial, enhanced = run.initial_fitness, run.best_fitness
    improvement = (100.0 * (initial - enhanced) / initial) if initial else 0.0

    out_dir = _out_dir(out)
    outputs = []
    report.write_rows(out_dir / "summary.csv",
                      ["fixture", "jobs", "generations", "population",
                       "operator_rate", "seed", "initial_waiting",
                       "enhanced_waiting", "improvement_pct",
                       "initial_penalty", "enhanced_penalty"],
                      [[path.stem, snapshot.num_jobs,
                        config.max_generations, config.population_size,
                        config.operator_rate, config.seed,
                        report.fmt_wait(initial), report.fmt_wait(enhanced),
                        report.fmt_pct(improvement),
                        report.fmt_penalty(job_penalty(model, initial)),
                        report.fmt_penalty(job_penalty(model, enhanced))]])
    outputs.append("summary.csv")
    report.write_rows(out_dir / "convergence.csv",
                      ["generation", "best_waiting", "best_penalty_aggregate"],
                      [[g, report.fmt_wait(b),
                        report.fmt_penalty(job_penalty(model, b))]
                       for g, b in run.trace])
    outputs.append("convergence.csv")
    rows = []
    for k, segment in enumerate(run.best_order.segments(), start=1):
        for position, job in enumerate(segment, start=1):
            rows.append([k, position, job,
                         report.fmt_wait(snapshot.exec_of[job])])
    report.write_rows(out_dir / "schedule.csv",
                      ["queue", "position", "job", "exec_time"], rows)
    outputs.append("schedule.csv")
    if not no_plots:
        report.plot_convergence(out_dir / "convergence.png", [run.trace],
                                [path.stem])
        outputs.append("convergence.png")
    _write_manifest(out_dir, "optimize",
                    {"version": CONFIG_VERSION, "fixture": fixture,
                     "ga": ga_cfg},
                    outputs)
    click.echo("%s: waiting %s -> %s (%.2f%% better), outputs in %s"
               % (path.stem, report.fmt_wait(initial),
                  report.fmt_wait(enhanced), improvement, out_dir))


def _single_queue(snapshot, k):
    q = snapshot.queues[k]
    return TierSnapshot(tier_index=snapshot.tier_index, queues=(q,),
                        exec_of={j: snapshot.exec_of[j] for j in q},
                        busy_until=(snapshot.busy_until[k],))


@main.command("reproduce-tables")
@click.option("--out", default="out/tables", show_default=True,
              help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Optimizer seed.")
@click.option("--generations", type=int, default=None,
              help="Override the per-instance generation counts.")
@click.option("--no-plots", is_flag=True, help="Skip figure rendering.")
def reproduce_tables(out, seed, generations, no_plots):
    """Regenerate the benchmark tables from the bundled fixtures.

    Initial columns come from the committed fixtures; enhanced columns
    are fresh optimizer runs. The full operator rate is used here so
    the runs match the candidates-per-generation budget the reference
    results were produced with.
    """
    model = PenaltyModel()
    out_dir = _out_dir(out)
    outputs = []

    def one_run(snapshot, gens):
        config = GaConfig(population_size=10,
                          max_generations=generations or gens,
                          operator_rate=1.0, seed=seed)
        run = run_ga(snapshot, config)
        return run

    def row_for(label_cols, initial, run):
        enhanced = run.best_fitness
        ip = job_penalty(model, initial)
        ep = job_penalty(model, enhanced)
        w_imp = 100.0 * (initial - enhanced) / initial if initial else 0.0
        p_imp = 100.0 * (ip - ep) / ip if ip else 0.0
        return label_cols + [report.fmt_wait(initial), report.fmt_penalty(ip),
                             report.fmt_wait(enhanced), report.fmt_penalty(ep),
                             report.fmt_pct(w_imp), report.fmt_pct(p_imp)]

    value_header = ["initial_waiting", "initial_penalty", "enhanced_waiting",
                    "enhanced_penalty", "waiting_improvement_pct",
                    "penalty_improvement_pct"]

    tier_rows, tier_entries = [], []
    tier_labels, tier_init, tier_enh = [], [], []
    for inst in TIER_INSTANCES:
        snapshot = load_fixture(fixture_path(inst.fixture))
        run = one_run(snapshot, inst.generations)
        tier_rows.append(row_for([inst.fixture, inst.length],
                                 inst.initial_waiting, run))
        label = "%s (%d jobs)" % (inst.fixture, inst.length)
        tier_entries.append((label, run.trace))
        tier_labels.append(inst.fixture)
        tier_init.append(inst.initial_waiting)
        tier_enh.append(run.best_fitness)
    report.write_rows(out_dir / "tier_scheduling.csv",
                      ["instance", "jobs"] + value_header, tier_rows)
    outputs.append("tier_scheduling.csv")

    queue_rows, queue_entries = [], []
    queue_labels, queue_init, queue_enh = [], [], []
    for inst in QUEUE_INSTANCES:
        snapshot = load_fixture(fixture_path(inst.fixture))
        sub = _single_queue(snapshot, inst.queue_index)
        run = one_run(sub, inst.generations)
        queue_rows.append(row_for([inst.fixture, inst.queue_index + 1,
                                   inst.length],
                                  inst.initial_waiting, run))
        label = "%s queue %d" % (inst.fixture, inst.queue_index + 1)
        queue_entries.append((label, run.trace))
        queue_labels.append(label)
        queue_init.append(inst.initial_waiting)
        queue_enh.append(run.best_fitness)
    report.write_rows(out_dir / "queue_scheduling.csv",
                      ["instance", "queue", "jobs"] + value_header, queue_rows)
    outputs.append("queue_scheduling.csv")

    if not no_plots:
        report.plot_convergence_grid(out_dir / "tier_convergence.png",
                                     tier_entries, "tier scheduling")
        outputs.append("tier_convergence.png")
        report.plot_convergence_grid(out_dir / "queue_convergence.png",
                                     queue_entries, "queue scheduling")
        outputs.append("queue_convergence.png")
        report.plot_improvement_bars(out_dir / "tier_waiting.png",
                                     tier_labels, tier_init, tier_enh,
                                     "total waiting time", "tier scheduling")
        outputs.append("tier_waiting.png")
        report.plot_improvement_bars(out_dir / "queue_waiting.png",
                                     queue_labels, queue_init, queue_enh,
                                     "total waiting time", "queue scheduling")
        outputs.append("queue_waiting.png")
    _write_manifest(out_dir, "reproduce-tables",
                    {"version": CONFIG_VERSION, "seed": seed,
                     "generations": generations},
                    outputs)
    click.echo("tables written to %s" % out_dir)


def _summary_row(strategy, result):
    # column names mirror the SimResult fields
    return [strategy.kind,
            report.fmt_wait(result.total_waiting),
            report.fmt_penalty(result.total_penalty_sum),
            report.fmt_penalty(result.total_penalty_aggregate),
            report.fmt_wait(result.mean_wait),
            report.fmt_wait(result.max_wait),
            len(result.jobs)]


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config or manifest (defaults are used without one).")
@click.option("--seed", type=int, default=None, help="Workload seed override.")
@click.option("--out", default="out/simulate", show_default=True,
              help="Output directory.")
@click.option("--no-plots", is_flag=True, help="Skip figure rendering.")
def simulate(config_path, seed, out, no_plots):
    """Run the event simulator once with a single dispatch strategy."""
    if config_path is not None:
        merged = _load_config(config_path, "simulate")
    else:
        merged = {k: (dict(v) if isinstance(v, dict) else v)
                  for k, v in DEFAULTS.items()}
    entry = merged.get("strategy", "virtual_ga")
    strategy = _build_strategy(entry, merged["ga"], merged["weights"])
    sim_cfg = _build_sim_config(merged, strategy)
    wl_cfg = _build_workload(merged, seed)
    if wl_cfg.num_tiers != sim_cfg.environment.num_tiers:
        raise CliError("workload and environment disagree on the tier count")
    jobs = generate(wl_cfg)
    try:
        result = run_sim(jobs, sim_cfg)
    except ValueError as exc:
        raise CliError(str(exc))

    out_dir = _out_dir(out)
    outputs = []
    report.write_rows(out_dir / "summary.csv",
                      ["strategy", "total_waiting", "total_penalty_sum",
                       "total_penalty_aggregate", "mean_wait", "max_wait",
                       "jobs", "epochs"],
                      [_summary_row(strategy, result) + [len(result.epochs)]])
    outputs.append("summary.csv")
    n_tiers = sim_cfg.environment.num_tiers
    job_rows = []
    for job in result.jobs:
        total = sum(job.waits)
        job_rows.append([job.id]
                        + [report.fmt_wait(w) for w in job.waits]
                        + [report.fmt_wait(total),
                           report.fmt_wait(response_time(job)),
                           report.fmt_penalty(job_penalty(sim_cfg.penalty,
                                                          total))])
    report.write_rows(out_dir / "jobs.csv",
                      ["job"]
                      + ["wait_tier%d" % (t + 1) for t in range(n_tiers)]
                      + ["total_wait", "response", "penalty"],
                      job_rows)
    outputs.append("jobs.csv")
    epoch_rows = [[e.tier + 1, report.fmt_wait(e.time),
                   report.fmt_wait(e.run.initial_fitness),
                   report.fmt_wait(e.run.best_fitness)]
                  for e in result.epochs]
    report.write_rows(out_dir / "epochs.csv",
                      ["tier", "time", "initial_waiting", "optimized_waiting"],
                      epoch_rows)
    outputs.append("epochs.csv")
    epoch_index = {}
    for e in result.epochs:
        idx = epoch_index.get(e.tier, 0) + 1
        epoch_index[e.tier] = idx
        name = "trace_%d_%d.csv" % (e.tier + 1, idx)
        report.write_rows(out_dir / name,
                          ["generation", "best_waiting",
                           "best_penalty_aggregate"],
                          [[g, report.fmt_wait(b),
                            report.fmt_penalty(job_penalty(sim_cfg.penalty, b))]
                           for g, b in e.run.trace])
        outputs.append(name)
    if not no_plots and result.epochs:
        per_tier = {}
        for e in result.epochs:
            per_tier.setdefault(e.tier + 1, []).append(
                (e.time, e.run.best_fitness))
        report.plot_epochs(out_dir / "epochs.png", per_tier)
        outputs.append("epochs.png")
    resolved = dict(merged)
    resolved["strategy"] = entry
    resolved["workload"] = {"arrival_rate": wl_cfg.arrival_rate,
                            "service_rate": wl_cfg.service_rate,
                            "num_jobs": wl_cfg.num_jobs,
                            "num_tiers": wl_cfg.num_tiers,
                            "seed": wl_cfg.seed}
    _write_manifest(out_dir, "simulate", resolved, outputs)
    click.echo("%s: total waiting %s over %d jobs, outputs in %s"
               % (strategy.kind, report.fmt_wait(result.total_waiting),
                  len(result.jobs), out_dir))


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config or manifest (defaults are used without one).")
@click.option("--reps", type=int, default=None,
              help="Replication count override.")
@click.option("--seed", type=int, default=None,
              help="Base workload seed override.")
@click.option("--out", default="out/compare", show_default=True,
              help="Output directory.")
@click.option("--no-plots", is_flag=True, help="Skip figure rendering.")
@click.option("--verbose", "-v", is_flag=True,
              help="Echo per-replication progress.")
def compare(config_path, reps, seed, out, no_plots, verbose):
    """Run several dispatch strategies over paired replications."""
    if config_path is not None:
        merged = _load_config(config_path, "compare")
    else:
        merged = {k: (dict(v) if isinstance(v, dict) else v)
                  for k, v in DEFAULTS.items()}
    entries = merged.get("strategies",
                         ["virtual_ga", "segmented_ga", "wlc", "wrr"])
    if not entries:
        raise CliError("config lists no strategies")
    strategies = [_build_strategy(e, merged["ga"], merged["weights"])
                  for e in entries]
    sim_cfgs = [_build_sim_config(merged, s) for s in strategies]
    n_reps = reps if reps is not None else int(merged.get("reps", 20))
    if n_reps < 1:
        raise CliError("reps must be at least 1")
    base_wl = _build_workload(merged, seed)
    if base_wl.num_tiers != sim_cfgs[0].environment.num_tiers:
        raise CliError("workload and environment disagree on the tier count")

    rep_rows = []
    totals = {s.kind: [] for s in strategies}
    means = {s.kind: [] for s in strategies}
    maxes = {s.kind: [] for s in strategies}
    penalties = {s.kind: [] for s in strategies}
    improvements = {s.kind: [] for s in strategies}
    for r in range(n_reps):
        wl = WorkloadConfig(base_wl.arrival_rate, base_wl.service_rate,
                            base_wl.num_jobs, base_wl.num_tiers,
                            seed=base_wl.seed + r)
        jobs = generate(wl)
        try:
            experiment = compare_strategies(jobs, sim_cfgs)
        except ValueError as exc:
            raise CliError(str(exc))
        for outcome in experiment.outcomes:
            kind = outcome.strategy.kind
            res = outcome.result
            rep_rows.append([r, wl.seed] + _summary_row(outcome.strategy, res))
            totals[kind].append(res.total_waiting)
            means[kind].append(res.mean_wait)
            maxes[kind].append(res.max_wait)
            penalties[kind].append(res.total_penalty_sum)
            improvements[kind].append(outcome.improvement_vs_worst_pct)
        if verbose:
            click.echo("replication %d/%d done" % (r + 1, n_reps))

    out_dir = _out_dir(out)
    outputs = []
    report.write_rows(out_dir / "replications.csv",
                      ["rep", "seed", "strategy", "total_waiting",
                       "total_penalty_sum", "total_penalty_aggregate",
                       "mean_wait", "max_wait", "jobs"],
                      rep_rows)
    outputs.append("replications.csv")
    kinds = [s.kind for s in strategies]
    summary_rows = []
    for kind in kinds:
        ts = totals[kind]
        std = statistics.stdev(ts) if len(ts) > 1 else 0.0
        summary_rows.append([kind, n_reps,
                             report.fmt_wait(statistics.mean(ts)),
                             report.fmt_wait(std),
                             report.fmt_wait(statistics.mean(means[kind])),
                             report.fmt_wait(statistics.mean(maxes[kind])),
                             report.fmt_penalty(statistics.mean(penalties[kind])),
                             report.fmt_pct(statistics.mean(improvements[kind]))])
    report.write_rows(out_dir / "summary.csv",
                      ["strategy", "reps", "mean_total_waiting",
                       "std_total_waiting", "mean_job_wait", "mean_max_wait",
                       "mean_penalty_sum", "improvement_vs_worst_pct"],
                      summary_rows)
    outputs.append("summary.csv")
    ranked = sorted(kinds, key=lambda k: statistics.mean(totals[k]))
    verdict_lines = ["ordering by mean total waiting: "
                     + " < ".join(ranked)]
    for kind in ranked:
        verdict_lines.append("%s: mean total waiting %s over %d replications"
                             % (kind,
                                report.fmt_wait(statistics.mean(totals[kind])),
                                n_reps))
    (out_dir / "verdict.txt").write_text("\n".join(verdict_lines) + "\n")
    outputs.append("verdict.txt")
    if not no_plots:
        stds = [statistics.stdev(totals[k]) if len(totals[k]) > 1 else 0.0
                for k in kinds]
        report.plot_strategy_bars(out_dir / "comparison.png", kinds,
                                  [statistics.mean(totals[k]) for k in kinds],
                                  stds, "total waiting time",
                                  "strategy comparison, %d replications"
                                  % n_reps)
        outputs.append("comparison.png")
    resolved = dict(merged)
    resolved["strategies"] = entries
    resolved["reps"] = n_reps
    resolved["workload"] = {"arrival_rate": base_wl.arrival_rate,
                            "service_rate": base_wl.service_rate,
                            "num_jobs": base_wl.num_jobs,
                            "num_tiers": base_wl.num_tiers,
                            "seed": base_wl.seed}
    _write_manifest(out_dir, "compare", resolved, outputs)
    click.echo(verdict_lines[0])
    click.echo("outputs in %s" % out_dir)


if __name__ == "__main__":
    sys.exit(main())

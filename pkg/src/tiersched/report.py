"""Delimited output and figure rendering for the command line tools.

Everything here writes deterministic files: no timestamps, fixed float
formatting, and the Agg backend so rendering works headless.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def write_rows(path, header, rows):
    """Write a CSV with the given header; values are written as-is."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def fmt_wait(x) -> str:
    return "%.4f" % x


def fmt_penalty(x) -> str:
    return "%.3f" % x


def fmt_pct(x) -> str:
    return "%.2f" % x


def plot_convergence(path, traces, labels, title="best waiting by generation"):
    """Step plot of best-so-far total waiting, one line per labelled trace."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for trace, label in zip(traces, labels):
        gens = [g for g, _ in trace]
        best = [b for _, b in trace]
        ax.step(gens, best, where="post", label=label)
    ax.set_xlabel("generation")
    ax.set_ylabel("total waiting time")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    if len(labels) > 1 or (labels and labels[0]):
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_convergence_grid(path, entries, suptitle):
    """Grid of convergence subplots; entries are (label, trace) pairs."""
    cols = 3
    rows = (len(entries) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.2 * rows),
                             squeeze=False)
    for idx, (label, trace) in enumerate(entries):
        ax = axes[idx // cols][idx % cols]
        ax.step([g for g, _ in trace], [b for _, b in trace], where="post")
        ax.set_title(label, fontsize=10)
        ax.grid(alpha=0.3)
    for idx in range(len(entries), rows * cols):
        axes[idx // cols][idx % cols].axis("off")
    fig.suptitle(suptitle)
    fig.supxlabel("generation")
    fig.supylabel("total waiting time")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_improvement_bars(path, labels, initial, enhanced, ylabel, title):
    """Paired bars of initial versus optimized values per instance."""
    fig, ax = plt.subplots(figsize=(1.6 * len(labels) + 2, 4.5))
    xs = range(len(labels))
    width = 0.38
    ax.bar([x - width / 2 for x in xs], initial, width, label="initial")
    ax.bar([x + width / 2 for x in xs], enhanced, width, label="optimized")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=9)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3, axis="y")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_strategy_bars(path, labels, means, stds, ylabel, title):
    """Bars of per-strategy means with standard deviation whiskers."""
    fig, ax = plt.subplots(figsize=(1.6 * len(labels) + 2, 4.5))
    xs = range(len(labels))
    ax.bar(list(xs), means, yerr=stds, capsize=4)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=9)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_epochs(path, per_tier, title="optimizer epochs"):
    """Per-tier scatter of epoch times against the optimized waiting.

    per_tier maps tier index (1-based) to a list of (time, best_fitness).
    """
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for tier in sorted(per_tier):
        points = per_tier[tier]
        ax.plot([t for t, _ in points], [w for _, w in points],
                marker="o", markersize=3, linewidth=1,
                label="tier %d" % tier)
    ax.set_xlabel("simulation time")
    ax.set_ylabel("optimized queue waiting")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

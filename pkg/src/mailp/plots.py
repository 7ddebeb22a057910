"""Figure rendering for the report path; PNGs land next to the CSV output."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_bounds_sweep(points, path) -> Path:
    ks = [p.k for p in points if p.status == "ok"]
    ts = [p.t_star for p in points if p.status == "ok"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, ts, marker="o", ms=3, lw=1.2)
    ax.set_yscale("log")
    ax.set_xlabel("centralization k")
    ax.set_ylabel("steps to convergence (bound)")
    ax.grid(alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def plot_trajectory(report, path) -> Path:
    steps = [t for t, _ in report.trajectory]
    n_agents = len(report.trajectory[0][1])
    fig, ax = plt.subplots(figsize=(6, 4))
    for agent in range(n_agents):
        ax.plot(steps, [totals[agent] for _, totals in report.trajectory], lw=1.0, label=f"agent {agent}")
    ax.set_xlabel("step")
    ax.set_ylabel("total information")
    ax.set_ylim(0, 1.02)
    if n_agents <= 8:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def plot_learning_curves(rows, path) -> Path:
    by_mode: dict[str, dict[int, list[tuple[int, float]]]] = {}
    for mode, seed, episode, mean_reward, _stderr in rows:
        by_mode.setdefault(mode, {}).setdefault(seed, []).append((episode, mean_reward))
    fig, ax = plt.subplots(figsize=(6.5, 4))
    colors = {"shared": "tab:blue", "independent": "tab:orange"}
    for mode, seeds in by_mode.items():
        color = colors.get(mode, None)
        episodes = None
        stacks = []
        for seed, curve in sorted(seeds.items()):
            curve.sort()
            xs = [e for e, _ in curve]
            ys = [v for _, v in curve]
            ax.plot(xs, ys, color=color, alpha=0.18, lw=0.8)
            episodes = xs
            stacks.append(ys)
        if episodes and stacks and all(len(s) == len(stacks[0]) for s in stacks):
            mean = [sum(col) / len(col) for col in zip(*stacks)]
            ax.plot(episodes, mean, color=color, lw=2.0, label=f"{mode} (mean of {len(stacks)})")
    ax.set_xlabel("training episodes")
    ax.set_ylabel("greedy evaluation total reward")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)


def plot_reward_histogram(totals, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    bins = max(10, min(50, int(math.sqrt(len(totals))) or 10))
    ax.hist(totals, bins=bins, color="tab:blue", alpha=0.8)
    ax.set_xlabel("episode total reward")
    ax.set_ylabel("episodes")
    ax.grid(alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return Path(path)

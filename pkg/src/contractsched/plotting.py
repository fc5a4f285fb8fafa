"""Matplotlib figures for simulation reports and bounds tables.

Imported lazily by the CLI; the rest of the package never needs matplotlib.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_simulation(run, path: str) -> str:
    """Achieved ratio per probe against the scenario bound."""
    fig, ax = plt.subplots(figsize=(7, 4))
    recs = run.records
    if recs and "log_T" in recs[0]:
        ax.scatter([r["log_T"] for r in recs], [r["ratio"] for r in recs], s=6, label="achieved")
        ax.set_xlabel("log of interruption time T")
    else:
        ax.plot(range(len(recs)), [r["ratio"] for r in recs], "o", ms=4, label="achieved")
        ax.set_xlabel("pattern")
    for check in run.checks:
        if check.name.startswith(("rank", "adversary")):
            continue
        ax.axhline(check.bound, ls="--", lw=1, label=f"bound: {check.name}")
    ax.set_ylabel("ratio")
    ax.set_title(f"{run.config.scenario}: k={run.config.k}, H={run.config.H}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_bounds_table(table, path: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    for tau in table.monotone:
        rows = [r for r in table.rows if r["tau"] == tau]
        ks = [r["k"] for r in rows]
        line, = ax.plot(ks, [r["noisy_upper"] for r in rows], "-o", ms=3,
                        label=f"upper, tau={tau:g}")
        ax.plot(ks, [r["noisy_lower"] for r in rows], ":", color=line.get_color(),
                label=f"lower, tau={tau:g}")
        if rows[0]["prior_work"] is not None:
            ax.axhline(rows[0]["prior_work"], ls="--", lw=1, color=line.get_color())
    ax.set_xlabel("advice bits k")
    ax.set_ylabel("acceleration ratio")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

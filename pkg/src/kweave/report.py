"""Figure rendering for benchmark runs.

Each bench command writes its CSV and, alongside it, a PNG plotting time to
first answer and total time against the varied parameter, mirroring how the
measurements are usually read.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def render_bench_figure(
    rows: list[dict],
    path: str | os.PathLike,
    xlabel: str,
    title: str,
    log_y: bool = True,
) -> None:
    """Plot bench rows (param / time_first_ms / time_total_ms) to a file."""
    params = [row["param"] for row in rows]
    firsts = [(row["param"], row["time_first_ms"]) for row in rows if row["time_first_ms"] is not None]
    totals = [(row["param"], row["time_total_ms"]) for row in rows]

    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    if firsts:
        ax.plot(*zip(*firsts), marker="s", color="black", label="first answer")
    if totals:
        ax.plot(*zip(*totals), marker="*", color="tab:blue", label="all answers")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("execution time (ms)")
    ax.set_title(title)
    if log_y and any(t > 0 for _, t in totals):
        ax.set_yscale("log")
    if params:
        ax.set_xlim(min(params), max(params) if max(params) > min(params) else min(params) + 1)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

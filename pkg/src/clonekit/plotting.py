"""Figures written next to the JSON reports."""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Any, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STATUS_COLORS = {
    "verified": "#2a9d8f",
    "expected-recorded": "#8ab17d",
    "timeout": "#e9c46a",
    "discrepancy": "#e76f51",
}


def status_chart(report: dict[str, Any], path: str | Path) -> Path:
    """One bar per line, height = number of instantiations, colored by status."""
    path = Path(path)
    entries = report["entries"]
    lines = [e["line"] for e in entries]
    counts = [len(e["params"]) for e in entries]
    colors = [STATUS_COLORS.get(e["status"], "grey") for e in entries]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.28 * len(lines) + 1.5), 3.2))
    ax.bar([str(x) for x in lines], counts, color=colors)
    ax.set_xlabel("line")
    ax.set_ylabel("clones")
    ax.set_title(f"Table {report['table']}: {report['instances']} clones")
    ax.tick_params(axis="x", labelsize=7)
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in STATUS_COLORS.values()]
    tally = Counter(e["status"] for e in entries)
    ax.legend(handles, [f"{s} ({tally.get(s, 0)})" for s in STATUS_COLORS], fontsize=7, loc="upper right")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def class_size_histogram(sizes: Sequence[int], path: str | Path, title: str = "") -> Path:
    path = Path(path)
    tally = sorted(Counter(sizes).items())
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar([str(s) for s, _ in tally], [c for _, c in tally], color="#264653")
    ax.set_xlabel("class size")
    ax.set_ylabel("classes")
    ax.set_title(title or f"{len(sizes)} classes")
    ax.tick_params(axis="x", labelsize=7, rotation=90)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path

"""Figures for benchmark CSV output."""

from __future__ import annotations

import os
from collections import defaultdict
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 3.8),
    "font.size": 10,
    "axes.titlesize": 11,
    "axes.grid": True,
    "grid.linewidth": 0.5,
    "grid.color": "#d2d2d2",
    "lines.linewidth": 1.6,
    "lines.markersize": 5,
    "legend.fontsize": 8,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _series(rows: Sequence[dict], metric: str) -> Dict[str, List[tuple]]:
    out: Dict[str, List[tuple]] = defaultdict(list)
    for r in rows:
        label = f"{r['query']} {r['dist']} {r['mode']}"
        out[label].append((int(r["threads"]), float(r[metric])))
    return {k: sorted(v) for k, v in out.items()}


def _line_plot(rows, metric: str, ylabel: str, title: str, path: str) -> str:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, pts in sorted(_series(rows, metric).items()):
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", label=label)
        ax.set_xlabel("threads")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.set_xscale("log", base=2)
        ax.xaxis.set_major_formatter(matplotlib.ticker.ScalarFormatter())
        if ax.lines:
            ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)
    return path


def _latency_plot(rows, path: str) -> str:
    kinds = ["put_vertex", "remove_vertex", "put_edge", "remove_edge", "get_vertex", "get_edge", "query"]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7.0, 3.8))
        width = 0.8 / max(1, len(rows))
        for j, r in enumerate(rows):
            xs = [i + j * width for i in range(len(kinds))]
            ys = [float(r[f"lat_{k}_us"]) for k in kinds]
            ax.bar(xs, ys, width=width, label=f"{r['threads']}t {r['query']} {r['dist']} {r['mode']}")
        ax.set_xticks([i + 0.4 - width / 2 for i in range(len(kinds))])
        ax.set_xticklabels([k.replace("_", "\n") for k in kinds])
        ax.set_yscale("log")
        ax.set_ylabel("mean latency (us)")
        ax.set_title("per-operation latency")
        if rows:
            ax.legend(loc="best")
        fig.savefig(path)
        plt.close(fig)
    return path


def render(rows: Sequence[dict], out_dir: str, fmt: str = "png") -> List[str]:
    """Write throughput, collects-per-query and latency figures; return paths."""
    os.makedirs(out_dir, exist_ok=True)
    p = lambda name: os.path.join(out_dir, f"{name}.{fmt}")  # noqa: E731
    return [
        _line_plot(rows, "throughput_ops_s", "ops / s", "throughput", p("throughput")),
        _line_plot(rows, "collects_per_query", "collects / query", "collects per query", p("collects")),
        _latency_plot(rows, p("latency")),
    ]

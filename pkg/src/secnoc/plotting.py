"""Figures for the report command: schedulability against flow count per
series, and per-flow latency ranges from a simulation run.

Figures are built on bare ``Figure`` objects so nothing touches pyplot's
global state and rendering works headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping as MappingT

import matplotlib
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
}

MARKERS = "osD^v<>ph*"
# PNG metadata normally embeds the matplotlib version; drop it for stable bytes
SAVE_KW = {"dpi": 150, "bbox_inches": "tight", "metadata": {"Software": None}}


def size(scale: float = 1.0, ratio: float = 0.62) -> tuple[float, float]:
    width = 5.0 * scale
    return width, width * ratio


def _save(fig: Figure, path: Path | str) -> Path:
    path = Path(path)
    fig.savefig(path, **SAVE_KW)
    return path


def _num(row, key):
    return float(row[key])


def schedulability_figure(rows: Iterable[MappingT], column: str, ylabel: str) -> Figure:
    """One line per series mode; ``rows`` as read back from the summary CSV."""
    series: dict[str, list[tuple[int, float]]] = {}
    for r in rows:
        series.setdefault(r["mode"], []).append((int(r["flow_count"]), _num(r, column)))
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=size())
        ax = fig.add_subplot()
        for k, (mode, pts) in enumerate(series.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [100 * p[1] for p in pts], marker=MARKERS[k % len(MARKERS)], label=mode)
        ax.set_xlabel("number of flows")
        ax.set_ylabel(ylabel)
        ax.set_ylim(-2, 102)
        ax.legend(frameon=False, ncol=3)
    return fig


def latency_figure(rows: Iterable[MappingT], normalized: bool = False) -> Figure:
    """Min/mean/max latency per flow, ordered by priority (highest first)."""
    rows = sorted(rows, key=lambda r: int(r["priority"]))
    prefix = "norm_" if normalized else ""
    x = [int(r["priority"]) for r in rows]
    lo = [_num(r, prefix + "min") for r in rows]
    mid = [_num(r, prefix + "mean") for r in rows]
    hi = [_num(r, prefix + "max") for r in rows]
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=size(1.3, 0.45))
        ax = fig.add_subplot()
        ax.vlines(x, lo, hi, color="0.55", linewidth=2)
        ax.plot(x, mid, "o", color="k", label="mean")
        ax.plot(x, lo, "_", color="C0", markersize=8, label="min")
        ax.plot(x, hi, "_", color="C3", markersize=8, label="max")
        ax.set_xlabel("flow priority (1 = highest)")
        ax.set_ylabel("cycles per flit" if normalized else "latency (cycles)")
        ax.legend(frameon=False, ncol=3)
    return fig


def render_series(rows: list[MappingT], out_dir: Path | str) -> list[Path]:
    out_dir = Path(out_dir)
    flows = schedulability_figure(rows, "flow_schedulability", "schedulable flows (%)")
    sets = schedulability_figure(rows, "flowset_schedulability", "fully schedulable flowsets (%)")
    return [_save(flows, out_dir / "flow_schedulability.png"),
            _save(sets, out_dir / "flowset_schedulability.png")]


def render_latency(rows: list[MappingT], out_dir: Path | str) -> list[Path]:
    out_dir = Path(out_dir)
    return [_save(latency_figure(rows), out_dir / "latency.png"),
            _save(latency_figure(rows, normalized=True), out_dir / "latency_normalized.png")]

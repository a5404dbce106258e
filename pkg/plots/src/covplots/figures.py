"""Figure builders: normalized-cost comparison and tessellation snapshots."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import read_cost, read_trace, snapshot_at
from .scenario import load_plot_scenario
from .voronoi_lite import cell_edges, voronoi_cells


def _label_for(path) -> str:
    stem = Path(path).stem
    return stem[len("cost_"):] if stem.startswith("cost_") else stem


def plot_cost_comparison(cost_csvs, out_path, *, onset: float | None = None,
                         scenario_path=None):
    """One normalized-cost curve per CSV on a log axis.

    The motion-onset marker comes from `onset` or, failing that, from the
    scenario file.  Returns the matplotlib figure after saving.
    """
    if not cost_csvs:
        raise ValueError("need at least one cost CSV")
    if onset is None and scenario_path is not None:
        onset = load_plot_scenario(scenario_path).motion_onset()
    fig, ax = plt.subplots(figsize=(7, 4.2))
    for path in cost_csvs:
        data = read_cost(path)
        ax.plot(data["t"], data["H_normalized"], label=_label_for(path), linewidth=1.4)
    ax.set_yscale("log")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("coverage cost / initial cost")
    if onset is not None:
        ax.axvline(onset, color="gray", linestyle=":", linewidth=1.2,
                   label="sources start moving")
    ax.legend(loc="best", fontsize=9)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    if out_path is not None:
        fig.savefig(out_path, dpi=150)
    return fig


def plot_snapshot(trace_csv, scenario_path, t: float, out_path):
    """Region, Voronoi cells, agents, centroids, and density contours at t.

    Cells are recomputed from the logged positions; centroids come straight
    from the trace.  Returns the matplotlib figure after saving.
    """
    scenario = load_plot_scenario(scenario_path)
    trace = read_trace(trace_csv)
    t_used, positions, centroids = snapshot_at(trace, t)

    fig, ax = plt.subplots(figsize=(8, 4.6))
    region = scenario.region
    outline = np.vstack([region, region[:1]])
    ax.plot(outline[:, 0], outline[:, 1], color="black", linewidth=1.2)

    lo = region.min(axis=0)
    hi = region.max(axis=0)
    xs = np.linspace(lo[0], hi[0], 160)
    ys = np.linspace(lo[1], hi[1], 160)
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    Z = scenario.density_at(pts, t_used).reshape(X.shape)
    ax.contour(X, Y, Z, levels=8, cmap="Reds", linewidths=0.9)

    for a, b in cell_edges(voronoi_cells(positions, region)):
        ax.plot([a[0], b[0]], [a[1], b[1]], color="tab:blue",
                linestyle="--", linewidth=0.9)
    ax.plot(centroids[:, 0], centroids[:, 1], "ko", markersize=4,
            label="cell centroids")
    ax.plot(positions[:, 0], positions[:, 1], "bx", markersize=8,
            markeredgewidth=2, label="agents")

    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"t = {t_used:g} s")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    if out_path is not None:
        fig.savefig(out_path, dpi=150)
    return fig

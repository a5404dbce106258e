"""Readers for the simulator's trace and cost CSV files.

The column layout is a fixed contract with the producing tool; any header
mismatch raises SchemaError rather than guessing.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import SchemaError, TimeOutOfRange

TRACE_COLUMNS = [
    "t", "agent_id", "x", "y", "m_i", "cx", "cy",
    "dist_to_centroid", "speed", "clamped", "switched",
]
COST_COLUMNS = ["t", "H", "H_normalized"]


def _read_csv(path, expected_columns):
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    if header != expected_columns:
        raise SchemaError(
            f"{path}: expected columns {expected_columns}, found {header}"
        )
    if len(lines) == 1:
        return {c: np.empty(0) for c in expected_columns}
    data = np.array(
        [[float(v) for v in line.split(",")] for line in lines[1:]]
    )
    return {c: data[:, i] for i, c in enumerate(expected_columns)}


def read_cost(path) -> dict:
    """Cost history columns: t, H, H_normalized."""
    return _read_csv(path, COST_COLUMNS)


def read_trace(path) -> dict:
    """Per-agent trace columns keyed by name, flat over (time, agent)."""
    return _read_csv(path, TRACE_COLUMNS)


def snapshot_at(trace: dict, t: float):
    """Positions and centroids at the logged time nearest to t.

    Raises TimeOutOfRange if t falls outside the logged interval.
    """
    times = np.unique(trace["t"])
    if len(times) == 0:
        raise TimeOutOfRange("trace holds no rows")
    if t < times[0] - 1e-9 or t > times[-1] + 1e-9:
        raise TimeOutOfRange(
            f"t={t} outside the logged interval [{times[0]}, {times[-1]}]"
        )
    nearest = times[int(np.argmin(np.abs(times - t)))]
    rows = trace["t"] == nearest
    order = np.argsort(trace["agent_id"][rows])
    pos = np.stack([trace["x"][rows], trace["y"][rows]], axis=1)[order]
    cen = np.stack([trace["cx"][rows], trace["cy"][rows]], axis=1)[order]
    return float(nearest), pos, cen

"""Small standalone Voronoi-cell computation for display.

Deliberately independent of the simulation engine: cells are recomputed
from logged agent positions by clipping the region with perpendicular
bisectors.  A consistency test cross-checks this against the engine.
"""

from __future__ import annotations

import numpy as np


def _clip(verts: np.ndarray, point: np.ndarray, normal: np.ndarray) -> np.ndarray:
    d = (verts - point) @ normal
    out = []
    m = len(verts)
    for i in range(m):
        j = (i + 1) % m
        if d[i] >= 0.0:
            out.append(verts[i])
        if (d[i] >= 0.0) != (d[j] >= 0.0):
            s = d[i] / (d[i] - d[j])
            out.append(verts[i] + s * (verts[j] - verts[i]))
    return np.array(out) if out else np.empty((0, 2))


def voronoi_cells(positions, region_vertices) -> list[np.ndarray]:
    """One clipped polygon (V_i, 2) per agent, in agent order."""
    positions = np.asarray(positions, dtype=float)
    region = np.asarray(region_vertices, dtype=float)
    cells = []
    for i, p in enumerate(positions):
        poly = region
        for j, q in enumerate(positions):
            if j == i or len(poly) < 3:
                continue
            gap = q - p
            norm = np.hypot(*gap)
            if norm == 0.0:
                continue
            poly = _clip(poly, 0.5 * (p + q), -gap / norm)
        cells.append(poly)
    return cells


def cell_edges(cells) -> list[tuple[np.ndarray, np.ndarray]]:
    """All polygon edges as (start, end) pairs for drawing."""
    edges = []
    for poly in cells:
        m = len(poly)
        for i in range(m):
            edges.append((poly[i], poly[(i + 1) % m]))
    return edges

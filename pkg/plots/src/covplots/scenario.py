"""Minimal scenario-file reading for rendering purposes.

Only the pieces a figure needs: the region outline and the density
components (to draw contours at a given time).  No simulation logic.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml


@dataclass(frozen=True)
class PlumeComponent:
    weight: float
    sigma: float
    times: np.ndarray
    points: np.ndarray

    def center_at(self, t: float) -> np.ndarray:
        times, pts = self.times, self.points
        if len(times) == 1 or t <= times[0]:
            return pts[0]
        if t >= times[-1]:
            return pts[-1]
        i = int(np.searchsorted(times, t, side="right")) - 1
        frac = (t - times[i]) / (times[i + 1] - times[i])
        return pts[i] + frac * (pts[i + 1] - pts[i])


@dataclass(frozen=True)
class PlotScenario:
    region: np.ndarray          # (V, 2) outline vertices
    components: tuple[PlumeComponent, ...]

    def density_at(self, pts: np.ndarray, t: float) -> np.ndarray:
        total = np.zeros(len(pts))
        for comp in self.components:
            d = pts - comp.center_at(t)
            total += comp.weight * np.exp(
                -(d * d).sum(axis=1) / (2.0 * comp.sigma**2)
            )
        return total

    def motion_onset(self) -> float | None:
        starts = []
        for comp in self.components:
            for i in range(len(comp.times) - 1):
                if np.hypot(*(comp.points[i + 1] - comp.points[i])) > 0.0:
                    starts.append(float(comp.times[i]))
                    break
        return min(starts) if starts else None


def load_plot_scenario(path) -> PlotScenario:
    doc = yaml.safe_load(Path(path).read_text())
    region = np.array(doc["region"], dtype=float)
    comps = []
    for c in doc["density"]["components"]:
        times = np.array([float(w[0]) for w in c["waypoints"]])
        points = np.array([[float(w[1][0]), float(w[1][1])] for w in c["waypoints"]])
        comps.append(PlumeComponent(float(c["weight"]), float(c["sigma"]), times, points))
    return PlotScenario(region, tuple(comps))

"""Time-varying Gaussian-mixture density fields.

A density is a sum of isotropic Gaussian bumps.  Each bump keeps a fixed
amplitude and width while its center travels along a piecewise-linear
waypoint schedule, so the center velocity is piecewise constant and known
in closed form at every instant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import as_point


@dataclass(frozen=True)
class SourceSchedule:
    """Piecewise-linear motion of one source center.

    `times` is strictly increasing, `points` the matching (N, 2) positions.
    Positions clamp to the first/last waypoint outside the schedule span and
    the velocity is right-continuous at interior waypoints (the upcoming
    leg's velocity applies at the instant itself) and zero outside the span.
    """

    times: np.ndarray
    points: np.ndarray

    @classmethod
    def from_waypoints(cls, waypoints) -> "SourceSchedule":
        if not waypoints:
            raise ValueError("schedule needs at least one waypoint")
        times = np.asarray([float(t) for t, _ in waypoints])
        points = np.asarray([as_point(p) for _, p in waypoints])
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("waypoint times must be strictly increasing")
        times.setflags(write=False)
        points.setflags(write=False)
        return cls(times, points)

    @classmethod
    def stationary(cls, position) -> "SourceSchedule":
        return cls.from_waypoints([(0.0, position)])

    def position_at(self, t: float) -> np.ndarray:
        times, pts = self.times, self.points
        if len(times) == 1 or t <= times[0]:
            return pts[0].copy()
        if t >= times[-1]:
            return pts[-1].copy()
        i = int(np.searchsorted(times, t, side="right")) - 1
        frac = (t - times[i]) / (times[i + 1] - times[i])
        return pts[i] + frac * (pts[i + 1] - pts[i])

    def velocity_at(self, t: float) -> np.ndarray:
        times, pts = self.times, self.points
        if len(times) == 1 or t < times[0] or t >= times[-1]:
            return np.zeros(2)
        i = int(np.searchsorted(times, t, side="right")) - 1
        return (pts[i + 1] - pts[i]) / (times[i + 1] - times[i])


@dataclass(frozen=True)
class GaussComponent:
    """One isotropic Gaussian bump: amplitude `weight`, width `sigma` (m)."""

    weight: float
    sigma: float
    schedule: SourceSchedule

    def __post_init__(self):
        if not (self.weight > 0.0):
            raise ValueError(f"component weight must be > 0, got {self.weight}")
        if not (self.sigma > 0.0):
            raise ValueError(f"component sigma must be > 0, got {self.sigma}")

    def source_at(self, t: float) -> np.ndarray:
        return self.schedule.position_at(t)

    def velocity_at(self, t: float) -> np.ndarray:
        return self.schedule.velocity_at(t)

    def value(self, q, t: float):
        """Bump value at query points; q is (..., 2)."""
        q = np.asarray(q, dtype=float)
        d = q - self.source_at(t)
        r2 = np.einsum("...i,...i->...", d, d)
        return self.weight * np.exp(-r2 / (2.0 * self.sigma**2))

    def gradient(self, q, t: float):
        """Spatial gradient of the bump, shape (..., 2)."""
        q = np.asarray(q, dtype=float)
        d = q - self.source_at(t)
        r2 = np.einsum("...i,...i->...", d, d)
        val = self.weight * np.exp(-r2 / (2.0 * self.sigma**2))
        return -d / self.sigma**2 * val[..., None]

    def time_derivative(self, q, t: float):
        """Rate of change at fixed q due to the moving center."""
        q = np.asarray(q, dtype=float)
        d = q - self.source_at(t)
        r2 = np.einsum("...i,...i->...", d, d)
        val = self.weight * np.exp(-r2 / (2.0 * self.sigma**2))
        return (d @ self.velocity_at(t)) / self.sigma**2 * val


@dataclass(frozen=True)
class GmmDensity:
    """Sum of Gaussian bumps; strictly positive everywhere."""

    components: tuple[GaussComponent, ...]

    def __post_init__(self):
        if len(self.components) == 0:
            raise ValueError("density needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))

    def __len__(self) -> int:
        return len(self.components)

    def value(self, q, t: float):
        total = self.components[0].value(q, t)
        for comp in self.components[1:]:
            total = total + comp.value(q, t)
        return total

    def time_derivative(self, q, t: float):
        total = self.components[0].time_derivative(q, t)
        for comp in self.components[1:]:
            total = total + comp.time_derivative(q, t)
        return total

    def source_velocities(self, t: float) -> np.ndarray:
        """(K, 2) array of source velocities at time t."""
        return np.array([c.velocity_at(t) for c in self.components])


def source_position(schedule: SourceSchedule, t: float) -> np.ndarray:
    return schedule.position_at(t)


def source_velocity(schedule: SourceSchedule, t: float) -> np.ndarray:
    return schedule.velocity_at(t)


def density_value(density: GmmDensity, q, t: float):
    return density.value(q, t)


def component_gradient(component: GaussComponent, q, t: float):
    return component.gradient(q, t)


def density_time_derivative(density: GmmDensity, q, t: float):
    return density.time_derivative(q, t)

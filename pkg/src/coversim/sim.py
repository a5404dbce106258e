"""Synchronous closed-loop stepper and the collective coverage cost.

One step: snapshot all positions, tessellate, compute each agent's moments
and control from that snapshot alone, clamp, forward-Euler integrate, and
project back into the region if the step overshot the boundary.  Given a
fixed scenario the whole trace is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import CONTROL_LAWS, ControlParams, LocalView, clamp_speed
from .density import GmmDensity
from .errors import CoverageError
from .geometry import ConvexPolygon, MIN_SEPARATION, tessellate
from .quadrature import QuadratureSpec, cell_quantities


@dataclass(frozen=True)
class Scenario:
    """A complete, validated simulation setup for one controller."""

    region: ConvexPolygon
    density: GmmDensity
    initial_positions: np.ndarray
    params: ControlParams
    controller: str
    dt: float
    t_end: float
    quadrature: QuadratureSpec = QuadratureSpec()
    cost_quadrature: QuadratureSpec = QuadratureSpec()

    def __post_init__(self):
        if self.controller not in CONTROL_LAWS:
            raise ValueError(
                f"unknown controller {self.controller!r}; expected one of {sorted(CONTROL_LAWS)}"
            )
        if not (self.dt > 0.0):
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        pts = np.asarray(self.initial_positions, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
            raise ValueError("initial_positions must be a nonempty (m, 2) array")
        for i, p in enumerate(pts):
            if not self.region.contains(p):
                raise ValueError(f"agent {i} at {p} starts outside the region")
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if np.hypot(*(pts[i] - pts[j])) < MIN_SEPARATION:
                    raise ValueError(f"agents {i} and {j} start closer than {MIN_SEPARATION} m")
        pts.setflags(write=False)
        object.__setattr__(self, "initial_positions", pts)

    @property
    def agent_count(self) -> int:
        return len(self.initial_positions)


@dataclass
class StepDiagnostics:
    """Per-agent quantities computed while evaluating one control step."""

    masses: np.ndarray          # (m,)
    centroids: np.ndarray       # (m, 2)
    centroid_dist: np.ndarray   # (m,)
    control_norm: np.ndarray    # (m,) pre-clamp
    speed: np.ndarray           # (m,) applied
    clamped: np.ndarray         # (m,) bool
    switched: np.ndarray        # (m,) bool
    velocities: np.ndarray      # (m, 2) applied


@dataclass
class SimTrace:
    """Logged history of a run; all arrays share the leading time axis."""

    times: np.ndarray
    positions: np.ndarray       # (L, m, 2)
    costs: np.ndarray           # (L,)
    masses: np.ndarray          # (L, m)
    centroids: np.ndarray       # (L, m, 2)
    centroid_dist: np.ndarray   # (L, m)
    control_norm: np.ndarray    # (L, m)
    speed: np.ndarray           # (L, m)
    clamped: np.ndarray         # (L, m)
    switched: np.ndarray        # (L, m)
    error: str | None = None


def _cost_over_cells(cells, positions, density: GmmDensity, t: float,
                     spec: QuadratureSpec) -> float:
    total = 0.0
    for cell in cells:
        q = cell_quantities(cell, density, t, spec, owner_pos=positions[cell.owner])
        total += q.cost
    return total


def coverage_cost(positions, region: ConvexPolygon, density: GmmDensity, t: float,
                  spec: QuadratureSpec) -> float:
    """Half the density-weighted squared distance to the nearest agent,
    evaluated as a sum of per-cell integrals over the tessellation."""
    positions = np.asarray(positions, dtype=float)
    cells = tessellate(positions, region)
    return _cost_over_cells(cells, positions, density, t, spec)


def _evaluate(positions, t: float, sc: Scenario, want_cost: bool):
    """Diagnostics, applied velocities, and (optionally) the coverage cost
    from one synchronous position snapshot."""
    cells = tessellate(positions, sc.region)
    law = CONTROL_LAWS[sc.controller]
    m = len(positions)
    vels = np.empty((m, 2))
    diag = StepDiagnostics(
        masses=np.empty(m),
        centroids=np.empty((m, 2)),
        centroid_dist=np.empty(m),
        control_norm=np.empty(m),
        speed=np.empty(m),
        clamped=np.zeros(m, dtype=bool),
        switched=np.zeros(m, dtype=bool),
        velocities=vels,
    )
    fuse_cost = want_cost and sc.cost_quadrature == sc.quadrature
    source_vels = sc.density.source_velocities(t)
    cost = 0.0
    for i, cell in enumerate(cells):
        quant = cell_quantities(
            cell,
            sc.density,
            t,
            sc.quadrature,
            with_rates=sc.controller == "dynamic",
            owner_pos=positions[i] if fuse_cost else None,
        )
        moments = quant.moments
        if fuse_cost:
            cost += quant.cost
        view = LocalView(
            position=positions[i],
            cell=cell,
            moments=moments,
            source_velocities=source_vels,
            density=sc.density,
            time=t,
            quadrature=sc.quadrature,
            moment_rates=quant.rates,
        )
        f = law(view, sc.params)
        v = clamp_speed(f, sc.params.max_speed)
        dist = float(np.hypot(*(positions[i] - moments.centroid)))
        diag.masses[i] = moments.total_mass
        diag.centroids[i] = moments.centroid
        diag.centroid_dist[i] = dist
        diag.control_norm[i] = float(np.hypot(*f))
        diag.speed[i] = float(np.hypot(*v))
        diag.clamped[i] = diag.control_norm[i] > sc.params.max_speed
        diag.switched[i] = sc.controller == "gmm" and dist <= sc.params.switch_radius
        vels[i] = v
    if want_cost and not fuse_cost:
        cost = _cost_over_cells(cells, positions, sc.density, t, sc.cost_quadrature)
    return diag, (cost if want_cost else None)


def step(positions, t: float, sc: Scenario):
    """Advance one dt from a snapshot; returns (new_positions, diagnostics)."""
    positions = np.asarray(positions, dtype=float)
    diag, _ = _evaluate(positions, t, sc, want_cost=False)
    new_positions = positions + sc.dt * diag.velocities
    for i in range(len(new_positions)):
        new_positions[i] = sc.region.project(new_positions[i])
    return new_positions, diag


def run(sc: Scenario, log_stride: int = 1) -> SimTrace:
    """Iterate the stepper from t=0 to t_end, logging every `log_stride` steps.

    The final time is always logged.  On an engine error the partial trace
    is returned with `error` set instead of raising.
    """
    if log_stride < 1:
        raise ValueError(f"log_stride must be >= 1, got {log_stride}")
    n_steps = int(round(sc.t_end / sc.dt)) if sc.t_end > 0 else 0
    fused = sc.cost_quadrature == sc.quadrature
    positions = sc.initial_positions.copy()
    rows: dict[str, list] = {k: [] for k in (
        "times", "positions", "costs", "masses", "centroids", "centroid_dist",
        "control_norm", "speed", "clamped", "switched")}
    error = None
    for i in range(n_steps + 1):
        t = i * sc.dt
        logging = i % log_stride == 0 or i == n_steps
        try:
            # With matching specs the cost is fused into every step's
            # quadrature so the logging stride never alters the trajectory.
            diag, cost = _evaluate(positions, t, sc, want_cost=fused or logging)
            if logging:
                rows["times"].append(t)
                rows["positions"].append(positions.copy())
                rows["costs"].append(cost)
                rows["masses"].append(diag.masses)
                rows["centroids"].append(diag.centroids)
                rows["centroid_dist"].append(diag.centroid_dist)
                rows["control_norm"].append(diag.control_norm)
                rows["speed"].append(diag.speed)
                rows["clamped"].append(diag.clamped)
                rows["switched"].append(diag.switched)
            if i < n_steps:
                positions = positions + sc.dt * diag.velocities
                for j in range(len(positions)):
                    positions[j] = sc.region.project(positions[j])
        except CoverageError as exc:
            error = f"aborted at t={t:g}: {exc}"
            break
    m = sc.agent_count
    return SimTrace(
        times=np.asarray(rows["times"]),
        positions=(np.asarray(rows["positions"])
                   if rows["positions"] else np.zeros((0, m, 2))),
        costs=np.asarray(rows["costs"], dtype=float),
        masses=np.asarray(rows["masses"]).reshape(-1, m),
        centroids=np.asarray(rows["centroids"]).reshape(-1, m, 2),
        centroid_dist=np.asarray(rows["centroid_dist"]).reshape(-1, m),
        control_norm=np.asarray(rows["control_norm"]).reshape(-1, m),
        speed=np.asarray(rows["speed"]).reshape(-1, m),
        clamped=np.asarray(rows["clamped"]).reshape(-1, m).astype(bool),
        switched=np.asarray(rows["switched"]).reshape(-1, m).astype(bool),
        error=error,
    )

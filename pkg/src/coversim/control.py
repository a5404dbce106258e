"""The three coverage control laws and their shared saturation logic.

Every law is a pure function of a LocalView (the information one agent can
assemble from its own cell and the globally known density) plus gains.
Nothing here reads global simulation state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import GmmDensity
from .errors import MissingPartials
from .geometry import VoronoiCell
from .quadrature import CellMoments, MomentRates, QuadratureSpec, boundary_flux_integral


@dataclass(frozen=True)
class ControlParams:
    """gain: proportional centroid-tracking gain (1/s).
    switch_radius: centroid distance below which the gain-correction term
        is dropped to avoid dividing by a vanishing distance (m).
    max_speed: applied-velocity norm cap (m/s)."""

    gain: float
    switch_radius: float = 1e-3
    max_speed: float = 3.5

    def __post_init__(self):
        for name in ("gain", "switch_radius", "max_speed"):
            v = getattr(self, name)
            if not (v > 0.0):
                raise ValueError(f"{name} must be > 0, got {v}")


@dataclass(frozen=True)
class LocalView:
    """Everything one agent knows when it computes its own control.

    The density itself (with the current time and quadrature spec) is part
    of the view because it is broadcast to every agent; no other agent's
    state is reachable from here beyond what the cell already encodes.
    source_velocities is the (K, 2) array of density source velocities at
    `time`.  moment_rates is only populated for the dynamic-baseline law.
    """

    position: np.ndarray
    cell: VoronoiCell
    moments: CellMoments
    source_velocities: np.ndarray
    density: GmmDensity
    time: float
    quadrature: QuadratureSpec
    moment_rates: MomentRates | None = None


def lloyd_control(view: LocalView, params: ControlParams) -> np.ndarray:
    """Proportional centroid tracking; ignores density motion entirely."""
    offset = view.position - view.moments.centroid
    return -(0.5 * params.gain) * offset


def dynamic_lloyd_control(view: LocalView, params: ControlParams) -> np.ndarray:
    """Centroid tracking with feed-forward from the moment time-derivatives."""
    if view.moment_rates is None:
        raise MissingPartials("dynamic baseline needs precomputed moment rates")
    rates = view.moment_rates
    offset = view.position - view.moments.centroid
    k = rates.mass_rate / view.moments.total_mass + params.gain
    return rates.centroid_rate - (0.5 * k) * offset


def gain_correction(view: LocalView) -> float:
    """Scalar compensation for density motion.

    Combines the mass-weighted offsets between the cell centroid and each
    component centroid with a line integral over any perimeter pieces on
    the coverage-region boundary (interior cells contribute nothing there).
    """
    mom = view.moments
    w = view.source_velocities
    offsets = mom.centroid[None, :] - mom.component_centroids
    total = float(2.0 * (mom.component_masses * np.einsum("ki,ki->k", w, offsets)).sum())
    boundary = view.cell.region_boundary_segments()
    if boundary:
        for comp in view.density.components:
            total += boundary_flux_integral(
                boundary, view.position, comp, view.time, view.quadrature
            )
    return total


def gmm_control(view: LocalView, params: ControlParams) -> np.ndarray:
    """Mixture-structured law: mass-weighted source velocity plus corrected
    centroid tracking.  Inside switch_radius of the centroid the correction
    term is dropped, removing its division by the squared distance."""
    mom = view.moments
    offset = view.position - mom.centroid
    feed_forward = (mom.component_masses @ view.source_velocities) / mom.total_mass
    dist = float(np.hypot(*offset))
    if dist <= params.switch_radius:
        return feed_forward - (0.5 * params.gain) * offset
    corr = gain_correction(view)
    k = params.gain - corr / (mom.total_mass * dist * dist)
    return feed_forward - (0.5 * k) * offset


def clamp_speed(v, max_speed: float) -> np.ndarray:
    """Rescale to max_speed when the norm exceeds it; zero passes through."""
    v = np.asarray(v, dtype=float)
    n = float(np.hypot(*v))
    if n <= max_speed:
        return v
    return v * (max_speed / n)


CONTROL_LAWS = {
    "lloyd": lloyd_control,
    "dynamic": dynamic_lloyd_control,
    "gmm": gmm_control,
}

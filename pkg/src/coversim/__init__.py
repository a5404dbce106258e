"""Deterministic multi-agent coverage control with moving Gaussian mixtures.

Agents tessellate a convex region into Voronoi cells and track
density-weighted centroids.  Three control laws are provided: plain
centroid tracking, a baseline with moment time-derivative feed-forward,
and a mixture-structured law that uses the known source velocities
directly.  Everything is deterministic for a fixed scenario.
"""

from .control import (
    CONTROL_LAWS,
    ControlParams,
    LocalView,
    clamp_speed,
    dynamic_lloyd_control,
    gain_correction,
    gmm_control,
    lloyd_control,
)
from .density import (
    GaussComponent,
    GmmDensity,
    SourceSchedule,
    component_gradient,
    density_time_derivative,
    density_value,
    source_position,
    source_velocity,
)
from .errors import (
    CoincidentAgents,
    CoverageError,
    MissingPartials,
    OutsideRegion,
    ParseError,
    QuadratureNotConverged,
    ValidationError,
)
from .geometry import (
    BoundarySegment,
    ConvexPolygon,
    VoronoiCell,
    as_point,
    clip_half_plane,
    polygon_area,
    polygon_perimeter,
    tessellate,
    voronoi_cell,
)
from .quadrature import (
    CellMoments,
    CellQuantities,
    MomentRates,
    QuadratureSpec,
    boundary_flux_integral,
    cell_moments,
    cell_quantities,
    moment_partials,
    polygon_quadrature,
    segment_flux_integral,
    triangle_rule,
)
from .scenario_io import (
    ScenarioFile,
    benchmark_scenario_path,
    load_scenario_file,
    motion_window,
    parse_scenario,
    run_and_export,
)
from .sim import Scenario, SimTrace, StepDiagnostics, coverage_cost, run, step

__version__ = "0.1.0"

__all__ = [
    "BoundarySegment",
    "CONTROL_LAWS",
    "CellMoments",
    "CellQuantities",
    "CoincidentAgents",
    "ControlParams",
    "ConvexPolygon",
    "CoverageError",
    "GaussComponent",
    "GmmDensity",
    "LocalView",
    "MissingPartials",
    "MomentRates",
    "OutsideRegion",
    "ParseError",
    "QuadratureNotConverged",
    "QuadratureSpec",
    "Scenario",
    "ScenarioFile",
    "SimTrace",
    "SourceSchedule",
    "StepDiagnostics",
    "ValidationError",
    "VoronoiCell",
    "as_point",
    "benchmark_scenario_path",
    "boundary_flux_integral",
    "cell_moments",
    "cell_quantities",
    "clamp_speed",
    "clip_half_plane",
    "component_gradient",
    "coverage_cost",
    "density_time_derivative",
    "density_value",
    "dynamic_lloyd_control",
    "gain_correction",
    "gmm_control",
    "lloyd_control",
    "load_scenario_file",
    "moment_partials",
    "motion_window",
    "parse_scenario",
    "polygon_area",
    "polygon_perimeter",
    "polygon_quadrature",
    "run",
    "run_and_export",
    "segment_flux_integral",
    "source_position",
    "source_velocity",
    "step",
    "tessellate",
    "triangle_rule",
    "voronoi_cell",
]

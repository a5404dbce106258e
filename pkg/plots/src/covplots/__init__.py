"""Offline figure generation for coverage-simulation CSV output."""

from .csvio import COST_COLUMNS, TRACE_COLUMNS, read_cost, read_trace, snapshot_at
from .errors import SchemaError, TimeOutOfRange
from .figures import plot_cost_comparison, plot_snapshot
from .scenario import PlotScenario, load_plot_scenario
from .voronoi_lite import cell_edges, voronoi_cells

__version__ = "0.1.0"

__all__ = [
    "COST_COLUMNS",
    "PlotScenario",
    "SchemaError",
    "TRACE_COLUMNS",
    "TimeOutOfRange",
    "cell_edges",
    "load_plot_scenario",
    "plot_cost_comparison",
    "plot_snapshot",
    "read_cost",
    "read_trace",
    "snapshot_at",
    "voronoi_cells",
]

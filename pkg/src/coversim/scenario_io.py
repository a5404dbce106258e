"""Scenario files (YAML), trace/cost CSV export, and the shipped benchmark.

The file schema mirrors Scenario plus run options; unknown keys are
rejected so typos fail loudly.  CSV output is byte-stable: fixed column
order, 17-significant-digit floats (lossless for float64), "\n" endings.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .control import CONTROL_LAWS, ControlParams
from .density import GaussComponent, GmmDensity, SourceSchedule
from .errors import ParseError, ValidationError
from .geometry import ConvexPolygon
from .quadrature import QuadratureSpec
from .sim import Scenario, SimTrace, run

TRACE_COLUMNS = [
    "t", "agent_id", "x", "y", "m_i", "cx", "cy",
    "dist_to_centroid", "speed", "clamped", "switched",
]
COST_COLUMNS = ["t", "H", "H_normalized"]
SUMMARY_COLUMNS = [
    "controller", "final_norm_cost", "mean_norm_cost_motion", "mean_norm_cost_after_onset",
]

_TOP_KEYS = {
    "region", "agents", "density", "params", "controllers", "dt", "t_end",
    "log_stride", "output_dir", "seed", "quadrature", "cost_quadrature",
}
_REQUIRED_KEYS = {"region", "agents", "density", "params", "controllers", "dt", "t_end"}


@dataclass
class ScenarioFile:
    """A parsed scenario file: one Scenario per requested controller."""

    scenarios: list[Scenario]
    controllers: list[str]
    log_stride: int
    output_dir: str
    seed: int
    path: Path | None = None


def benchmark_scenario_path() -> Path:
    """Location of the plume-tracking benchmark shipped with the package."""
    return Path(resources.files("coversim").joinpath("data/benchmark.yaml"))


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ValidationError(f"{context}: missing required key '{key}'")
    return mapping[key]


def _reject_unknown(mapping: dict, allowed: set[str], context: str):
    for key in mapping:
        if key not in allowed:
            raise ValidationError(f"{context}: unknown key '{key}'")


def _as_float(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{context}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, context: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{context}: expected an integer, got {value!r}")
    return value


def _as_xy(value, context: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"{context}: expected [x, y], got {value!r}")
    return (_as_float(value[0], context), _as_float(value[1], context))


def _parse_quadrature(node, context: str) -> QuadratureSpec:
    if node is None:
        return QuadratureSpec()
    if not isinstance(node, dict):
        raise ValidationError(f"{context}: expected a mapping, got {node!r}")
    _reject_unknown(node, {"order", "max_depth", "rel_tol"}, context)
    kwargs = {}
    if "order" in node:
        kwargs["order"] = _as_int(node["order"], f"{context}.order")
    if "max_depth" in node:
        kwargs["max_depth"] = _as_int(node["max_depth"], f"{context}.max_depth")
    if "rel_tol" in node:
        kwargs["rel_tol"] = _as_float(node["rel_tol"], f"{context}.rel_tol")
    try:
        return QuadratureSpec(**kwargs)
    except ValueError as exc:
        raise ValidationError(f"{context}: {exc}") from exc


def _parse_density(node, context: str) -> GmmDensity:
    if not isinstance(node, dict):
        raise ValidationError(f"{context}: expected a mapping, got {node!r}")
    _reject_unknown(node, {"components"}, context)
    comps_node = _require(node, "components", context)
    if not isinstance(comps_node, list) or not comps_node:
        raise ValidationError(f"{context}.components: expected a nonempty list")
    comps = []
    for i, cnode in enumerate(comps_node):
        ctx = f"{context}.components[{i}]"
        if not isinstance(cnode, dict):
            raise ValidationError(f"{ctx}: expected a mapping, got {cnode!r}")
        _reject_unknown(cnode, {"weight", "sigma", "waypoints"}, ctx)
        weight = _as_float(_require(cnode, "weight", ctx), f"{ctx}.weight")
        sigma = _as_float(_require(cnode, "sigma", ctx), f"{ctx}.sigma")
        wps_node = _require(cnode, "waypoints", ctx)
        if not isinstance(wps_node, list) or not wps_node:
            raise ValidationError(f"{ctx}.waypoints: expected a nonempty list")
        waypoints = []
        for j, wp in enumerate(wps_node):
            wctx = f"{ctx}.waypoints[{j}]"
            if not isinstance(wp, (list, tuple)) or len(wp) != 2:
                raise ValidationError(f"{wctx}: expected [time, [x, y]], got {wp!r}")
            waypoints.append((_as_float(wp[0], wctx), _as_xy(wp[1], wctx)))
        try:
            comps.append(GaussComponent(weight, sigma, SourceSchedule.from_waypoints(waypoints)))
        except ValueError as exc:
            raise ValidationError(f"{ctx}: {exc}") from exc
    return GmmDensity(tuple(comps))


def _parse_params(node, context: str) -> ControlParams:
    if not isinstance(node, dict):
        raise ValidationError(f"{context}: expected a mapping, got {node!r}")
    _reject_unknown(node, {"gain", "switch_radius", "max_speed"}, context)
    kwargs = {"gain": _as_float(_require(node, "gain", context), f"{context}.gain")}
    if "switch_radius" in node:
        kwargs["switch_radius"] = _as_float(node["switch_radius"], f"{context}.switch_radius")
    if "max_speed" in node:
        kwargs["max_speed"] = _as_float(node["max_speed"], f"{context}.max_speed")
    try:
        return ControlParams(**kwargs)
    except ValueError as exc:
        raise ValidationError(f"{context}: {exc}") from exc


def load_scenario_file(path) -> ScenarioFile:
    """Parse and validate a scenario file into per-controller Scenarios."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: malformed YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a mapping")
    _reject_unknown(doc, _TOP_KEYS, "scenario")
    for key in _REQUIRED_KEYS:
        _require(doc, key, "scenario")

    region_node = doc["region"]
    if not isinstance(region_node, list) or len(region_node) < 3:
        raise ValidationError("scenario.region: expected a list of at least 3 [x, y] vertices")
    try:
        region = ConvexPolygon([_as_xy(v, f"scenario.region[{i}]") for i, v in enumerate(region_node)])
    except ValueError as exc:
        raise ValidationError(f"scenario.region: {exc}") from exc

    agents_node = doc["agents"]
    if not isinstance(agents_node, list) or not agents_node:
        raise ValidationError("scenario.agents: expected a nonempty list of [x, y]")
    agents = np.array([_as_xy(v, f"scenario.agents[{i}]") for i, v in enumerate(agents_node)])

    density = _parse_density(doc["density"], "scenario.density")
    params = _parse_params(doc["params"], "scenario.params")
    dt = _as_float(doc["dt"], "scenario.dt")
    t_end = _as_float(doc["t_end"], "scenario.t_end")
    quadrature = _parse_quadrature(doc.get("quadrature"), "scenario.quadrature")
    cost_quadrature = _parse_quadrature(doc.get("cost_quadrature"), "scenario.cost_quadrature")

    controllers_node = doc["controllers"]
    if not isinstance(controllers_node, list):
        raise ValidationError("scenario.controllers: expected a list")
    controllers = []
    for c in controllers_node:
        if c not in CONTROL_LAWS:
            raise ValidationError(
                f"scenario.controllers: unknown controller {c!r}; expected one of {sorted(CONTROL_LAWS)}"
            )
        controllers.append(c)

    log_stride = _as_int(doc.get("log_stride", 1), "scenario.log_stride")
    if log_stride < 1:
        raise ValidationError(f"scenario.log_stride: must be >= 1, got {log_stride}")
    output_dir = doc.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ValidationError(f"scenario.output_dir: expected a string, got {output_dir!r}")
    seed = _as_int(doc.get("seed", 0), "scenario.seed")

    scenarios = []
    for c in controllers:
        try:
            scenarios.append(
                Scenario(
                    region=region,
                    density=density,
                    initial_positions=agents,
                    params=params,
                    controller=c,
                    dt=dt,
                    t_end=t_end,
                    quadrature=quadrature,
                    cost_quadrature=cost_quadrature,
                )
            )
        except ValueError as exc:
            raise ValidationError(f"scenario: {exc}") from exc
    return ScenarioFile(scenarios, controllers, log_stride, output_dir, seed, path)


def parse_scenario(path) -> list[Scenario]:
    """One validated Scenario per controller requested by the file."""
    return load_scenario_file(path).scenarios


def motion_window(density: GmmDensity) -> tuple[float, float] | None:
    """Earliest and latest times at which any source is actually moving."""
    starts, ends = [], []
    for comp in density.components:
        times, pts = comp.schedule.times, comp.schedule.points
        for i in range(len(times) - 1):
            if np.hypot(*(pts[i + 1] - pts[i])) > 0.0:
                starts.append(float(times[i]))
                ends.append(float(times[i + 1]))
    if not starts:
        return None
    return min(starts), max(ends)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_trace_csv(path: Path, trace: SimTrace) -> None:
    lines = [",".join(TRACE_COLUMNS)]
    for n, t in enumerate(trace.times):
        for i in range(trace.positions.shape[1]):
            lines.append(",".join([
                _fmt(t), str(i),
                _fmt(trace.positions[n, i, 0]), _fmt(trace.positions[n, i, 1]),
                _fmt(trace.masses[n, i]),
                _fmt(trace.centroids[n, i, 0]), _fmt(trace.centroids[n, i, 1]),
                _fmt(trace.centroid_dist[n, i]), _fmt(trace.speed[n, i]),
                str(int(trace.clamped[n, i])), str(int(trace.switched[n, i])),
            ]))
    path.write_text("\n".join(lines) + "\n")


def write_cost_csv(path: Path, trace: SimTrace) -> None:
    lines = [",".join(COST_COLUMNS)]
    h0 = trace.costs[0] if len(trace.costs) else math.nan
    for n, t in enumerate(trace.times):
        lines.append(",".join([_fmt(t), _fmt(trace.costs[n]), _fmt(trace.costs[n] / h0)]))
    path.write_text("\n".join(lines) + "\n")


def _window_average(times: np.ndarray, values: np.ndarray, start: float, end: float) -> float:
    mask = (times >= start - 1e-12) & (times <= end + 1e-12)
    t, v = times[mask], values[mask]
    if len(t) == 0:
        return math.nan
    if len(t) == 1:
        return float(v[0])
    return float(np.trapezoid(v, t) / (t[-1] - t[0]))


def run_and_export(scenarios: list[Scenario], outdir, *, log_stride: int = 1) -> int:
    """Run every scenario and write trace/cost/summary CSVs under outdir.

    Returns 0 when every run completes, 2 when any aborts (partial traces
    are still written).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    summary_lines = [",".join(SUMMARY_COLUMNS)]
    for sc in scenarios:
        trace = run(sc, log_stride=log_stride)
        write_trace_csv(outdir / f"trace_{sc.controller}.csv", trace)
        write_cost_csv(outdir / f"cost_{sc.controller}.csv", trace)
        if trace.error is not None or len(trace.costs) == 0:
            status = 2
            continue
        norm = trace.costs / trace.costs[0]
        window = motion_window(sc.density)
        if window is None:
            mean_motion = math.nan
            mean_after = math.nan
        else:
            onset, motion_end = window
            mean_motion = _window_average(trace.times, norm, onset, motion_end)
            mean_after = _window_average(trace.times, norm, onset, trace.times[-1])
        summary_lines.append(",".join([
            sc.controller, _fmt(norm[-1]), _fmt(mean_motion), _fmt(mean_after),
        ]))
    (outdir / "summary.csv").write_text("\n".join(summary_lines) + "\n")
    return status


def with_overrides(sf: ScenarioFile, *, controllers=None, dt=None, log_stride=None,
                   output_dir=None) -> ScenarioFile:
    """A copy of the parsed file with command-line overrides applied."""
    chosen = sf.controllers if controllers is None else list(controllers)
    for c in chosen:
        if c not in CONTROL_LAWS:
            raise ValidationError(f"unknown controller {c!r}; expected one of {sorted(CONTROL_LAWS)}")
    by_name = {sc.controller: sc for sc in sf.scenarios}
    base = sf.scenarios[0] if sf.scenarios else None
    scenarios = []
    for c in chosen:
        sc = by_name.get(c)
        if sc is None:
            if base is None:
                raise ValidationError("scenario file requested no controllers and none supplied")
            sc = dataclasses.replace(base, controller=c)
        if dt is not None:
            try:
                sc = dataclasses.replace(sc, dt=dt)
            except ValueError as exc:
                raise ValidationError(f"dt override: {exc}") from exc
        scenarios.append(sc)
    return ScenarioFile(
        scenarios=scenarios,
        controllers=chosen,
        log_stride=sf.log_stride if log_stride is None else log_stride,
        output_dir=sf.output_dir if output_dir is None else str(output_dir),
        seed=sf.seed,
        path=sf.path,
    )

"""Scenario file parsing, CSV export, and CLI behavior."""

import numpy as np
import pytest

from coversim import (
    ParseError,
    QuadratureSpec,
    ValidationError,
    benchmark_scenario_path,
    load_scenario_file,
    motion_window,
    parse_scenario,
    polygon_area,
    run_and_export,
)
from coversim.cli import main as cli_main
from coversim.scenario_io import COST_COLUMNS, SUMMARY_COLUMNS, TRACE_COLUMNS

TINY_SCENARIO = """
region: [[0.0, 0.0], [30.0, 0.0], [30.0, 20.0], [0.0, 20.0]]
agents: [[8.0, 10.0], [22.0, 10.0]]
params: {gain: 0.5, switch_radius: 0.001, max_speed: 10.0}
controllers: [lloyd, gmm]
dt: 0.1
t_end: 0.5
log_stride: 1
output_dir: out
quadrature: {order: 7, max_depth: 8, rel_tol: 1.0e-7}
cost_quadrature: {order: 7, max_depth: 8, rel_tol: 1.0e-7}
density:
  components:
    - weight: 10.0
      sigma: 5.0
      waypoints: [[0.0, [10.0, 10.0]], [1.0, [14.0, 10.0]]]
"""


@pytest.fixture
def tiny_file(tmp_path):
    p = tmp_path / "tiny.yaml"
    p.write_text(TINY_SCENARIO)
    return p


class TestBenchmarkFile:
    def test_parses_to_three_scenarios(self):
        sf = load_scenario_file(benchmark_scenario_path())
        assert sf.controllers == ["lloyd", "dynamic", "gmm"]
        assert len(sf.scenarios) == 3
        sc = sf.scenarios[0]
        assert sc.agent_count == 5
        assert len(sc.density) == 5
        assert polygon_area(sc.region) == pytest.approx(20000.0)
        assert sc.params.gain == 0.05
        assert sc.params.max_speed == 3.5
        for comp in sc.density.components:
            assert comp.sigma == 15.0
            assert comp.weight == 100.0

    def test_motion_window(self):
        sf = load_scenario_file(benchmark_scenario_path())
        assert motion_window(sf.scenarios[0].density) == (20.0, 50.0)

    def test_sources_stay_inside_region(self):
        sf = load_scenario_file(benchmark_scenario_path())
        sc = sf.scenarios[0]
        for comp in sc.density.components:
            for t in np.linspace(0.0, sc.t_end, 211):
                assert sc.region.contains(comp.source_at(float(t)))


class TestValidation:
    def _write(self, tmp_path, text):
        p = tmp_path / "bad.yaml"
        p.write_text(text)
        return p

    def test_zero_gain_rejected(self, tmp_path, tiny_file):
        text = tiny_file.read_text().replace("gain: 0.5", "gain: 0.0")
        with pytest.raises(ValidationError, match="gain"):
            parse_scenario(self._write(tmp_path, text))

    def test_coincident_agents_rejected(self, tmp_path, tiny_file):
        text = tiny_file.read_text().replace("[22.0, 10.0]", "[8.0, 10.0]")
        with pytest.raises(ValidationError, match="closer"):
            parse_scenario(self._write(tmp_path, text))

    def test_agent_outside_region_rejected(self, tmp_path, tiny_file):
        text = tiny_file.read_text().replace("[22.0, 10.0]", "[42.0, 10.0]")
        with pytest.raises(ValidationError, match="outside"):
            parse_scenario(self._write(tmp_path, text))

    def test_unknown_key_rejected_by_name(self, tmp_path, tiny_file):
        text = tiny_file.read_text() + "\nwind_speed: 3\n"
        with pytest.raises(ValidationError, match="wind_speed"):
            parse_scenario(self._write(tmp_path, text))

    def test_unknown_controller_rejected(self, tmp_path, tiny_file):
        text = tiny_file.read_text().replace("[lloyd, gmm]", "[lloyd, newton]")
        with pytest.raises(ValidationError, match="newton"):
            parse_scenario(self._write(tmp_path, text))

    def test_malformed_yaml_is_parse_error(self, tmp_path):
        with pytest.raises(ParseError):
            parse_scenario(self._write(tmp_path, "region: [[0, 0], [1"))

    def test_missing_file_is_parse_error(self, tmp_path):
        with pytest.raises(ParseError):
            parse_scenario(tmp_path / "nope.yaml")

    def test_missing_required_key(self, tmp_path, tiny_file):
        text = tiny_file.read_text().replace("dt: 0.1", "")
        with pytest.raises(ValidationError, match="dt"):
            parse_scenario(self._write(tmp_path, text))


class TestExport:
    def test_files_schema_and_rows(self, tiny_file, tmp_path):
        sf = load_scenario_file(tiny_file)
        out = tmp_path / "out"
        status = run_and_export(sf.scenarios, out, log_stride=sf.log_stride)
        assert status == 0
        for name in ("lloyd", "gmm"):
            trace = (out / f"trace_{name}.csv").read_text().splitlines()
            assert trace[0] == ",".join(TRACE_COLUMNS)
            # 6 logged times x 2 agents
            assert len(trace) == 1 + 6 * 2
            cost = (out / f"cost_{name}.csv").read_text().splitlines()
            assert cost[0] == ",".join(COST_COLUMNS)
            assert len(cost) == 1 + 6
            first = cost[1].split(",")
            assert float(first[2]) == 1.0  # normalized start
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0] == ",".join(SUMMARY_COLUMNS)
        assert len(summary) == 3
        assert summary[1].split(",")[0] == "lloyd"
        assert summary[2].split(",")[0] == "gmm"

    def test_reruns_are_byte_identical(self, tiny_file, tmp_path):
        sf = load_scenario_file(tiny_file)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_and_export(sf.scenarios, out1, log_stride=1)
        run_and_export(sf.scenarios, out2, log_stride=1)
        for name in ("trace_lloyd.csv", "cost_lloyd.csv", "trace_gmm.csv",
                     "cost_gmm.csv", "summary.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_floats_round_trip(self, tiny_file, tmp_path):
        sf = load_scenario_file(tiny_file)
        out = tmp_path / "out"
        run_and_export(sf.scenarios, out, log_stride=1)
        from coversim import run
        trace = run(sf.scenarios[0], log_stride=1)
        lines = (out / "trace_lloyd.csv").read_text().splitlines()[1:]
        m = trace.positions.shape[1]
        for n, t in enumerate(trace.times):
            for i in range(m):
                cols = lines[n * m + i].split(",")
                assert float(cols[0]) == t
                assert float(cols[2]) == trace.positions[n, i, 0]
                assert float(cols[3]) == trace.positions[n, i, 1]
                assert float(cols[4]) == trace.masses[n, i]

    def test_empty_controller_list(self, tmp_path):
        status = run_and_export([], tmp_path / "out")
        assert status == 0
        summary = (tmp_path / "out" / "summary.csv").read_text().splitlines()
        assert summary == [",".join(SUMMARY_COLUMNS)]
        assert not (tmp_path / "out" / "trace_lloyd.csv").exists()

    def test_partial_outputs_on_failure(self, tiny_file, tmp_path):
        import dataclasses
        sf = load_scenario_file(tiny_file)
        broken = [
            dataclasses.replace(
                sc,
                quadrature=QuadratureSpec(order=7, max_depth=0, rel_tol=1e-9),
                cost_quadrature=QuadratureSpec(order=7, max_depth=0, rel_tol=1e-9),
            )
            for sc in sf.scenarios
        ]
        out = tmp_path / "out"
        status = run_and_export(broken, out)
        assert status == 2
        assert (out / "trace_lloyd.csv").exists()
        assert (out / "summary.csv").read_text().splitlines() == [",".join(SUMMARY_COLUMNS)]


class TestCli:
    def test_validate_ok(self, tiny_file, capsys):
        assert cli_main(["validate", str(tiny_file)]) == 0
        assert "OK" in capsys.readouterr().out

    def test_validate_bad_file(self, tmp_path, capsys):
        p = tmp_path / "bad.yaml"
        p.write_text("region: 5\n")
        assert cli_main(["validate", str(p)]) == 1
        assert "error" in capsys.readouterr().err

    def test_run_writes_outputs(self, tiny_file, tmp_path):
        out = tmp_path / "cli_out"
        code = cli_main([
            "run", str(tiny_file), "--out", str(out),
            "--controllers", "lloyd", "--log-stride", "5",
        ])
        assert code == 0
        assert (out / "trace_lloyd.csv").exists()
        assert not (out / "trace_gmm.csv").exists()
        cost_lines = (out / "cost_lloyd.csv").read_text().splitlines()
        # stride 5 on 5 steps: t=0 and t=0.5
        assert len(cost_lines) == 1 + 2

    def test_run_with_dt_override(self, tiny_file, tmp_path):
        out = tmp_path / "cli_out2"
        code = cli_main(["run", str(tiny_file), "--out", str(out), "--dt", "0.25",
                         "--controllers", "gmm"])
        assert code == 0
        lines = (out / "cost_gmm.csv").read_text().splitlines()
        assert len(lines) == 1 + 3  # t = 0, 0.25, 0.5

    def test_unknown_controller_override_fails(self, tiny_file):
        assert cli_main(["run", str(tiny_file), "--controllers", "magic"]) == 1

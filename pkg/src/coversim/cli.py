"""Command-line front end: `coversim run` and `coversim validate`."""

from __future__ import annotations

import argparse
import sys

from .errors import CoverageError, ParseError, ValidationError
from .scenario_io import load_scenario_file, run_and_export, with_overrides


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coversim",
        description="Multi-agent coverage-control simulation driven by a scenario file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the scenario and write CSV traces")
    p_run.add_argument("scenario", help="path to a scenario YAML file")
    p_run.add_argument("--out", default=None, help="output directory (default: file's output_dir)")
    p_run.add_argument(
        "--controllers",
        default=None,
        help="comma-separated subset/override, e.g. lloyd,dynamic,gmm",
    )
    p_run.add_argument("--dt", type=float, default=None, help="time step override in seconds")
    p_run.add_argument("--log-stride", type=int, default=None, help="log every N steps")

    p_val = sub.add_parser("validate", help="parse and validate the scenario file")
    p_val.add_argument("scenario", help="path to a scenario YAML file")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        sf = load_scenario_file(args.scenario)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        print(f"OK: {len(sf.scenarios)} scenario(s) for controllers {sf.controllers}")
        return 0

    try:
        controllers = args.controllers.split(",") if args.controllers else None
        sf = with_overrides(
            sf,
            controllers=controllers,
            dt=args.dt,
            log_stride=args.log_stride,
            output_dir=args.out,
        )
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        status = run_and_export(sf.scenarios, sf.output_dir, log_stride=sf.log_stride)
    except CoverageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    if status == 0:
        print(f"wrote traces for {len(sf.scenarios)} controller(s) to {sf.output_dir}")
    else:
        print("one or more runs aborted; partial traces written", file=sys.stderr)
    return status


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line figure generation from simulation CSV output."""

from __future__ import annotations

import argparse
import sys

from .errors import SchemaError, TimeOutOfRange
from .figures import plot_cost_comparison, plot_snapshot


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coversim-plot",
        description="Render cost-comparison and snapshot figures from trace CSVs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cost = sub.add_parser("cost", help="normalized cost vs time, log axis")
    p_cost.add_argument("cost_csvs", nargs="+", help="cost_<controller>.csv files")
    p_cost.add_argument("--out", required=True, help="output image (png/svg)")
    p_cost.add_argument("--onset", type=float, default=None,
                        help="motion-onset marker time in seconds")
    p_cost.add_argument("--scenario", default=None,
                        help="scenario file to derive the onset marker from")

    p_snap = sub.add_parser("snapshot", help="cells, agents and density at one time")
    p_snap.add_argument("trace_csv", help="trace_<controller>.csv file")
    p_snap.add_argument("--scenario", required=True, help="scenario YAML file")
    p_snap.add_argument("--time", type=float, required=True, help="snapshot time")
    p_snap.add_argument("--out", required=True, help="output image (png/svg)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "cost":
            plot_cost_comparison(args.cost_csvs, args.out, onset=args.onset,
                                 scenario_path=args.scenario)
        else:
            plot_snapshot(args.trace_csv, args.scenario, args.time, args.out)
    except (SchemaError, TimeOutOfRange, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

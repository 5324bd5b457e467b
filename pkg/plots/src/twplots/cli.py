"""Command-line entry point: plot timeseries|distribution --in ... --out ..."""

import argparse
import sys
from pathlib import Path

from .figures import DEFAULT_MODES, plot_distribution, plot_timeseries
from .readers import InputError


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="plot", description="Render figures from simulation CSV outputs"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ts = sub.add_parser("timeseries", help="mode populations vs time")
    p_ts.add_argument("--in", dest="inputs", nargs="+", required=True, type=Path)
    p_ts.add_argument("--out", required=True, type=Path)
    p_ts.add_argument(
        "--modes",
        nargs="+",
        type=int,
        default=list(DEFAULT_MODES),
        help="mode indices to draw (default: %(default)s)",
    )

    p_dist = sub.add_parser("distribution", help="terminal n^-1 + 1 vs mode index")
    p_dist.add_argument("--in", dest="inputs", nargs="+", required=True, type=Path)
    p_dist.add_argument("--out", required=True, type=Path)

    args = parser.parse_args(argv)
    try:
        if args.command == "timeseries":
            plot_timeseries(args.inputs, args.out, modes=args.modes)
        else:
            plot_distribution(args.inputs, args.out)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

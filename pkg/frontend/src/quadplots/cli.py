"""Command line front end: render figures from a tracking-run log.

Usage:
    quadtrack-plots render <log.csv> [--out DIR] [--panels a,b,...]
                    [--dpi N] [--tilt-floor F]

Exit codes match the simulator CLI where the fault classes overlap:
0 success, 2 usage, 3 bad input or value, 6 file system trouble.
"""

from __future__ import annotations

import argparse
import sys

from .figure import DEFAULT_PANELS, DEFAULT_TILT_FLOOR, PANELS, FigureSpec, render_figures
from .schema import SchemaError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BAD_VALUE = 3
EXIT_IO = 6


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadtrack-plots",
        description="Render summary figures from tracking-run CSV logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="render one log into one image")
    render.add_argument("log", help="CSV log written by the simulator CLI")
    render.add_argument("--out", default=".",
                        help="output directory (default: current directory)")
    render.add_argument("--panels", default=",".join(DEFAULT_PANELS),
                        help="comma-separated panel names; available: %s"
                             % ", ".join(PANELS))
    render.add_argument("--dpi", type=int, default=130,
                        help="raster resolution (default: 130)")
    render.add_argument("--tilt-floor", type=float, default=DEFAULT_TILT_FLOOR,
                        help="guide level for the cos(theta)cos(psi) band "
                             "(default: 1/1.9, the stock altitude saturation)")
    return parser


def _cmd_render(args: argparse.Namespace) -> int:
    panels = tuple(p.strip() for p in args.panels.split(",") if p.strip())
    spec = FigureSpec.for_directory(
        args.log, args.out,
        panels=panels, dpi=args.dpi, tilt_floor=args.tilt_floor,
    )
    for path in render_figures(spec):
        print("wrote %s" % path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both on.
        return int(exc.code or 0)

    try:
        if args.command == "render":
            return _cmd_render(args)
        parser.error("unknown command %r" % (args.command,))
        return EXIT_USAGE
    except (SchemaError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_BAD_VALUE
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

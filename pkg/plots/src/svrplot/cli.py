"""Command-line front end: `svr-plot loglog ...` and `svr-plot bars ...`."""

import argparse
import sys

from .plotting import FORMATS, Y_FIELDS, PlotSpec, render_loglog, \
    render_saturation_bars


def _window(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected n0,n1")
    return float(parts[0]), float(parts[1])


def build_parser():
    parser = argparse.ArgumentParser(
        prog="svr-plot",
        description="Render experiment metric CSVs as figures.")
    sub = parser.add_subparsers(dest="command", required=True)

    loglog = sub.add_parser(
        "loglog", help="log-log error curves with fitted-slope legend")
    loglog.add_argument("--csv", required=True, help="metrics CSV path")
    loglog.add_argument("--y", required=True, choices=Y_FIELDS,
                        dest="y_field", help="error column to plot")
    loglog.add_argument("--group", required=True,
                        help="column giving one curve per value")
    loglog.add_argument("--window", required=True, type=_window,
                        help="slope-fit n range as n0,n1")
    loglog.add_argument("--out", required=True, help="output image path")
    loglog.add_argument("--format", choices=FORMATS, default=None,
                        help="image format (default: from --out suffix)")

    bars = sub.add_parser(
        "bars", help="saturation bar chart (log y) from a group,mse CSV")
    bars.add_argument("--csv", required=True, help="saturation CSV path")
    bars.add_argument("--group", required=True, help="group column")
    bars.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "loglog":
            fmt = args.format or \
                ("svg" if args.out.endswith(".svg") else "png")
            spec = PlotSpec(csv=args.csv, y_field=args.y_field,
                            group_by=args.group, window=args.window,
                            out=args.out, format=fmt)
            slopes = render_loglog(spec)
            for group in sorted(slopes, key=str):
                print(f"{group},{slopes[group]!r}")
        else:
            render_saturation_bars(args.csv, args.group, args.out)
    except (ValueError, OSError) as exc:
        print(f"svr-plot: error: {exc}", file=sys.stderr)
        raise SystemExit(2)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""embedstab-plots render --csv PATH --out PATH --outline-threshold T"""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, ReportFormatError, render_heatmap


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="embedstab-plots")
    sub = parser.add_subparsers(dest="command", required=True)
    pr = sub.add_parser("render", help="render a report CSV as a heatmap")
    pr.add_argument("--csv", required=True, help="bucketed report CSV")
    pr.add_argument("--out", required=True, help="output .svg (or .png) path")
    pr.add_argument("--outline-threshold", type=float, default=0.01)
    pr.add_argument(
        "--use-csv-flags",
        action="store_true",
        help="outline the producer's flags instead of applying the mass rule",
    )
    pr.add_argument("--title", default="")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(
            csv_path=args.csv,
            out_path=args.out,
            outline_threshold=args.outline_threshold,
            use_csv_flags=args.use_csv_flags,
            title=args.title,
        )
        out = render_heatmap(spec)
    except (ReportFormatError, OSError, ValueError) as exc:
        print(f"embedstab-plots: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

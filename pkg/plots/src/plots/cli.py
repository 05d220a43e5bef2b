"""`plot_timeline`: render a timeline CSV to an SVG step chart.

Exit codes: 0 success, 1 unreadable input or schema error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .render import SchemaError, render_text


def _proc_list(arg: str) -> list[int]:
    try:
        return [int(p) for p in arg.split(",") if p != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a comma-separated list of processor ids, got {arg!r}")


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="plot_timeline",
        description="Render a cost-analyzer timeline CSV as an SVG step "
                    "chart of remaining operations per processor.")
    ap.add_argument("csv", help="timeline CSV written by the analyzer "
                                "(time_ns,processor,remaining_ops)")
    ap.add_argument("-o", "--out", required=True, help="output SVG path")
    ap.add_argument("--title", help="chart title (default: none)")
    ap.add_argument("--procs", type=_proc_list, metavar="0,1,...",
                    help="render only these processors")
    ap.add_argument("--allow-empty", action="store_true",
                    help="render an empty chart instead of failing when the "
                         "CSV has no data rows")
    ns = ap.parse_args(argv)

    try:
        with open(ns.csv, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        svg = render_text(text, title=ns.title, procs=ns.procs,
                          allow_empty=ns.allow_empty)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    with open(ns.out, "w", encoding="utf-8", newline="\n") as f:
        f.write(svg)
    return 0


if __name__ == "__main__":
    sys.exit(main())

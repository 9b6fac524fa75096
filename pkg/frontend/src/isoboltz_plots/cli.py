"""Script interface: isoboltz-plots <kind> <inputs...> -o out.png"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, render
from .readers import FormatError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="isoboltz-plots",
        description="Figures from simulator output files (CSV and snapshots).",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("inputs", nargs="+", help="CSV path or snapshot prefix(es)")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(kind=args.kind, inputs=tuple(args.inputs), output=args.output))
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

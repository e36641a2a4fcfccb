"""CLI: plot --summary PATH... --out DIR --format png|svg"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import render
from .spec import PlotSpec


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="plot", description=__doc__)
    parser.add_argument("--summary", nargs="+", required=True, help="campaign summary JSON files")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", choices=["png", "svg"], default="png")
    parser.add_argument("--name", default="penalties", help="output file stem")
    parser.add_argument("--policies", default=None, help="comma-separated policy ids (default: all)")
    args = parser.parse_args(argv)

    spec = PlotSpec(
        summary_paths=list(args.summary),
        out_path=str(Path(args.out) / f"{args.name}.{args.format}"),
        fmt=args.format,
        policies=args.policies.split(",") if args.policies else None,
    )
    problems = render(spec)
    for p in problems:
        print(f"skipped: {p}", file=sys.stderr)
    if not problems:
        print(spec.out_path)
    return 1 if problems else 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point: render one figure from a summary CSV."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import SchemaError, render

EXIT_OK = 0
EXIT_SCHEMA = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render grouped-bar benchmark figures from a summary CSV.",
    )
    parser.add_argument("summary", type=Path, help="summary CSV path")
    parser.add_argument("--figure", type=int, choices=(1, 2, 3), required=True,
                        help="which metric triple to plot")
    parser.add_argument("--out", type=Path, required=True, help="output image path")
    parser.add_argument("--format", choices=("svg", "png"), default="svg")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if not args.summary.exists():
            raise SchemaError(f"{args.summary}: no such file")
        out = render(args.summary, args.figure, args.out, fmt=args.format)
    except SchemaError as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"plotkit: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

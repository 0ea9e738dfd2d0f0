"""figures <kind> --in <csv> --out <img> [--manifest <json>]

Exit codes: 0 success, 1 rendering/schema failure (message on stderr),
2 invalid arguments.
"""

from __future__ import annotations

import argparse
import sys

from figures.render import KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures", description="Render shormagic experiment CSVs")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="csv_path", required=True, help="input CSV (documented schema)")
    parser.add_argument("--out", dest="out_path", required=True, help="output image (.png or .svg; both written)")
    parser.add_argument("--manifest", dest="manifest_path", default=None, help="experiment manifest JSON")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            kind=args.kind,
            csv_path=args.csv_path,
            out_path=args.out_path,
            manifest_path=args.manifest_path,
        )
        _, written = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""plotkit render --spec FILE --out IMG"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpecError, load_spec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render figures from simulator outputs")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render")
    p_render.add_argument("--spec", required=True, help="figure spec JSON")
    p_render.add_argument("--out", required=True, help="output image (png/svg)")
    args = parser.parse_args(argv)

    try:
        spec = load_spec(args.spec)
        render(spec, args.out)
    except FigureSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

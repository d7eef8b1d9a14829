"""Command-line entry point: figures <kind> --in <files...> --out <image>."""

import argparse
import sys

from .io import FormatError
from .plots import KINDS

__all__ = ["main", "run_command"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render plots from the wave toolkit's CSV/JSON outputs",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind, fn in KINDS.items():
        p = sub.add_parser(kind, help=fn.__doc__)
        p.add_argument("--in", dest="inputs", nargs="+", required=True,
                       metavar="FILE", help="input CSV/JSON files")
        p.add_argument("--out", required=True, metavar="IMAGE",
                       help="output image path (e.g. plot.png)")
        p.set_defaults(fn=fn)
    return parser


def run_command(argv) -> int:
    args = _build_parser().parse_args(argv)
    try:
        args.fn(args.inputs, args.out)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))

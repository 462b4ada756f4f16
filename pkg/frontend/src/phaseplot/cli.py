"""phaseplot CLI: plot --kind KIND --in CSV --out IMAGE [--alpha-c CSV]."""
from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .render import PLOT_KINDS, PlotJob, render


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phaseplot",
                                 description="render figures from sweep CSVs")
    ap.add_argument("--kind", choices=list(PLOT_KINDS), required=True)
    ap.add_argument("--in", dest="input_path", required=True,
                    help="input CSV (harness schema)")
    ap.add_argument("--out", dest="output_path", required=True,
                    help="output image (png or svg)")
    ap.add_argument("--alpha-c", dest="alpha_c_path",
                    help="optional alpha_c bisection CSV overlay")
    ap.add_argument("--title")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(kind=args.kind, input_path=args.input_path,
                  output_path=args.output_path,
                  alpha_c_path=args.alpha_c_path, title=args.title)
    try:
        render(job)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

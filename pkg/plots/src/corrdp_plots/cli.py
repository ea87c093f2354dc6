"""Flag-driven figure rendering.

    corrdp-plot --input results.csv --kind error_curves --out errors.png
    corrdp-plot --input sweep.csv --kind bound_comparison --out bounds.svg
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, PlotSpec, render
from .results_io import SchemaMismatch

EXIT_OK = 0
EXIT_ERROR = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="corrdp-plot",
        description="Render a harness result file (csv or json) to a figure.",
    )
    p.add_argument("--input", required=True, help="harness result file")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--out", required=True, help="image path; format by extension")
    p.add_argument(
        "--log-scale",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="y-axis scale; the default is log for error_curves, linear otherwise",
    )
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        spec = PlotSpec(
            input=args.input, kind=args.kind, output=args.out, log_scale=args.log_scale
        )
        out = render(spec)
    except (SchemaMismatch, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

"""Command line for rendering latmaj benchmark CSVs into figures and tables.

`--figure tables` writes the aligned text table to --out and a LaTeX variant
next to it (same name, .tex suffix).
"""

from __future__ import annotations

import argparse
import os
import sys

from .figures import FAMILY_FIGURES, FIGURE_IDS, render_family_figure, render_thermal_spectrum
from .loader import load_cells
from .tables import render_latex_table, render_text_table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latmaj-figs", description=__doc__)
    parser.add_argument("--csv", required=True, help="benchmark CSV from `latmaj bench`")
    parser.add_argument("--figure", required=True, choices=FIGURE_IDS)
    parser.add_argument("--out", required=True, help="output file (.png/.svg, or .txt for tables)")
    return parser


def render(csv_path: str, figure: str, out_path: str) -> None:
    cells = load_cells(csv_path)
    if figure in FAMILY_FIGURES:
        render_family_figure(cells, FAMILY_FIGURES[figure], out_path)
    elif figure == "thermal_spectrum":
        render_thermal_spectrum(cells, out_path)
    elif figure == "tables":
        with open(out_path, "w") as fp:
            fp.write(render_text_table(cells))
        tex_path = os.path.splitext(out_path)[0] + ".tex"
        with open(tex_path, "w") as fp:
            fp.write(render_latex_table(cells))
    else:
        raise ValueError(f"unknown figure id {figure!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.csv, args.figure, args.out)
    except (ValueError, FileNotFoundError) as exc:
        print(f"latmaj-figs: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

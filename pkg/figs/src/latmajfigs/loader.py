"""Load and validate latmaj benchmark CSV files.

The expected schema is the one `latmaj bench` writes: one row per
(family, d, selector) cell with mean/stderr columns per metric.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

REQUIRED_COLUMNS = (
    "family",
    "d",
    "selector",
    "n_trials",
    "mean_N",
    "stderr_N",
    "mean_W",
    "stderr_W",
    "mean_delta0",
    "stderr_delta0",
    "mean_final_sum_sq",
    "stderr_final_sum_sq",
    "mean_wall_ns",
    "stderr_wall_ns",
)

METRIC_KEYS = ("N", "W", "delta0", "final_sum_sq", "wall_ns")


@dataclass
class Cell:
    family: str
    d: int
    selector: str
    n_trials: int
    means: dict
    stderrs: dict


def _parse_float(value: str, column: str, line: int) -> float | None:
    if value == "":
        return None
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"line {line}: column {column!r} is not numeric: {value!r}") from None


def load_cells(path: str) -> list[Cell]:
    with open(path, newline="") as fp:
        reader = csv.DictReader(fp)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        missing = [c for c in REQUIRED_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        cells = []
        for lineno, rec in enumerate(reader, start=2):
            means = {}
            stderrs = {}
            for key in METRIC_KEYS:
                mean = _parse_float(rec[f"mean_{key}"], f"mean_{key}", lineno)
                if mean is None:
                    raise ValueError(f"line {lineno}: empty cell in mean_{key}")
                means[key] = mean
                stderrs[key] = _parse_float(rec[f"stderr_{key}"], f"stderr_{key}", lineno)
            cells.append(
                Cell(
                    family=rec["family"],
                    d=int(rec["d"]),
                    selector=rec["selector"],
                    n_trials=int(rec["n_trials"]),
                    means=means,
                    stderrs=stderrs,
                )
            )
    if not cells:
        raise ValueError(f"{path}: no data rows")
    return cells


def improvement_over_ssgg(cells: list[Cell]) -> dict[tuple[str, int, str], float]:
    """Delta_SS = (N_ssgg - N_sel) / N_ssgg * 100 per (family, d, selector)."""
    baseline = {(c.family, c.d): c.means["N"] for c in cells if c.selector == "ssgg"}
    out = {}
    for c in cells:
        if c.selector == "ssgg":
            continue
        base = baseline.get((c.family, c.d))
        if base:
            out[(c.family, c.d, c.selector)] = (base - c.means["N"]) / base * 100.0
    return out

"""Aligned plain-text and LaTeX tables in the benchmark-summary layout:
one row per (family, d), operation count N per selector, the percentage
reduction over SS-GG, and equivalent-swap count W per selector.
"""

from __future__ import annotations

from .loader import Cell, improvement_over_ssgg


def _fmt_mean(cell: Cell | None, key: str) -> str:
    if cell is None:
        return "-"
    mean = cell.means[key]
    se = cell.stderrs[key]
    if se is None:
        return f"{mean:.0f}"
    return f"{mean:.0f} ({se:.0f})"


def format_improvement(value: float) -> str:
    return f"{value:+.1f}%"


def _collect(cells: list[Cell]):
    selectors = sorted({c.selector for c in cells})
    combos = sorted({(c.family, c.d) for c in cells})
    lookup = {(c.family, c.d, c.selector): c for c in cells}
    return selectors, combos, lookup


def render_text_table(cells: list[Cell]) -> str:
    selectors, combos, lookup = _collect(cells)
    improvements = improvement_over_ssgg(cells)
    header = ["family", "d"]
    header += [f"N[{s}]" for s in selectors]
    header += [f"dSS[{s}]" for s in selectors if s != "ssgg"]
    header += [f"W[{s}]" for s in selectors]
    rows = [header]
    for family, d in combos:
        rec = [family, str(d)]
        for s in selectors:
            rec.append(_fmt_mean(lookup.get((family, d, s)), "N"))
        for s in selectors:
            if s == "ssgg":
                continue
            val = improvements.get((family, d, s))
            rec.append(format_improvement(val) if val is not None else "-")
        for s in selectors:
            rec.append(_fmt_mean(lookup.get((family, d, s)), "W"))
        rows.append(rec)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    for i, rec in enumerate(rows):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(rec, widths)))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def render_latex_table(cells: list[Cell]) -> str:
    selectors, combos, lookup = _collect(cells)
    improvements = improvement_over_ssgg(cells)
    n_cols = 2 + len(selectors) * 2 + sum(1 for s in selectors if s != "ssgg")
    out = ["\\begin{tabular}{ll" + "r" * (n_cols - 2) + "}", "\\toprule"]
    head = ["family", "$d$"]
    head += [f"{s} $N$" for s in selectors]
    head += [f"$\\Delta_{{SS}}$ {s}" for s in selectors if s != "ssgg"]
    head += [f"{s} $W$" for s in selectors]
    out.append(" & ".join(head) + " \\\\")
    out.append("\\midrule")
    for family, d in combos:
        rec = [family.replace("_", "\\_"), str(d)]
        for s in selectors:
            rec.append(_fmt_mean(lookup.get((family, d, s)), "N"))
        for s in selectors:
            if s == "ssgg":
                continue
            val = improvements.get((family, d, s))
            rec.append(format_improvement(val).replace("%", "\\%") if val is not None else "-")
        for s in selectors:
            rec.append(_fmt_mean(lookup.get((family, d, s)), "W"))
        out.append(" & ".join(rec) + " \\\\")
    out += ["\\bottomrule", "\\end{tabular}"]
    return "\n".join(out) + "\n"

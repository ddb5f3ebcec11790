"""Render benchmark figures from loaded cells.

Family figures (deep_gaussian, deep_qary, deep_gm) are five-panel grids:
operation count N, equivalent-swap count W, selector time, root-Hermite
factor, and final profile variance versus dimension, one line per selector
with a shaded +-1 standard-error band.  thermal_spectrum has the fixed-alpha
sweep (log scale) and the percentage-improvement-over-SS-GG panel.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "latmajfigs"

import matplotlib.pyplot as plt
import numpy as np

from .loader import Cell, improvement_over_ssgg

FAMILY_FIGURES = {
    "deep_gaussian": "gaussian",
    "deep_qary": "qary",
    "deep_gm": "goldstein_mayer",
}

PANELS = (
    ("N", "operation count N"),
    ("W", "equivalent swaps W"),
    ("wall_ns", "selector time [s]"),
    ("delta0", "root-Hermite factor"),
    ("final_sum_sq", "final profile variance"),
)

FIGURE_IDS = tuple(FAMILY_FIGURES) + ("thermal_spectrum", "tables")


def _series(cells: list[Cell], family: str):
    """selector -> sorted arrays (d, mean, stderr) per metric."""
    rows = [c for c in cells if c.family == family]
    if not rows:
        raise ValueError(f"no rows for family {family!r}")
    out = {}
    for c in rows:
        out.setdefault(c.selector, []).append(c)
    for sel in out:
        out[sel] = sorted(out[sel], key=lambda c: c.d)
    return out


def render_family_figure(cells: list[Cell], family: str, out_path: str) -> None:
    series = _series(cells, family)
    fig, axes = plt.subplots(1, 5, figsize=(22, 4.2))
    for ax, (key, label) in zip(axes, PANELS):
        for sel, rows in sorted(series.items()):
            d = np.array([c.d for c in rows], dtype=float)
            scale = 1e-9 if key == "wall_ns" else 1.0
            mean = np.array([c.means[key] for c in rows]) * scale
            se = np.array([c.stderrs[key] or 0.0 for c in rows]) * scale
            ax.plot(d, mean, marker="o", ms=3, label=sel)
            ax.fill_between(d, mean - se, mean + se, alpha=0.25, linewidth=0)
        ax.set_xlabel("dimension d")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8)
    fig.suptitle(f"deep-insertion selectors, {family} lattices")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def _thermal_alpha(selector: str) -> float | None:
    if not selector.startswith("thermal:"):
        return None
    for item in selector.split(":", 1)[1].split(","):
        key, _, value = item.partition("=")
        if key.strip() == "alpha":
            return float(value)
    return None


def render_thermal_spectrum(cells: list[Cell], out_path: str) -> None:
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(12, 4.4))

    # panel (a): fixed-alpha sweep, one line per (family, d)
    sweep = {}
    for c in cells:
        alpha = _thermal_alpha(c.selector)
        if alpha is not None:
            sweep.setdefault((c.family, c.d), []).append((alpha, c.means["N"], c.stderrs["N"] or 0.0))
    if sweep:
        for (family, d), pts in sorted(sweep.items()):
            pts.sort()
            a = np.array([p[0] for p in pts])
            n = np.array([p[1] for p in pts])
            se = np.array([p[2] for p in pts])
            ax_a.plot(a, n, marker="o", ms=3, label=f"{family} d={d}")
            ax_a.fill_between(a, n - se, n + se, alpha=0.25, linewidth=0)
        ax_a.set_yscale("log")
        ax_a.legend(fontsize=8)
    else:
        ax_a.text(0.5, 0.5, "no fixed-alpha rows in CSV", ha="center", va="center", transform=ax_a.transAxes)
    ax_a.set_xlabel("alpha")
    ax_a.set_ylabel("operation count N")
    ax_a.set_title("(a) fixed-temperature sweep")
    ax_a.grid(alpha=0.3, which="both")

    # panel (b): percentage improvement over SS-GG per selector
    improvements = improvement_over_ssgg(cells)
    grouped = {}
    for (family, d, sel), val in improvements.items():
        if _thermal_alpha(sel) is not None:
            continue
        grouped.setdefault(sel, []).append((f"{family}\nd={d}", val))
    if grouped:
        labels = sorted({lab for rows in grouped.values() for lab, _ in rows})
        x = np.arange(len(labels), dtype=float)
        width = 0.8 / max(1, len(grouped))
        for i, (sel, rows) in enumerate(sorted(grouped.items())):
            vals = {lab: v for lab, v in rows}
            y = [vals.get(lab, np.nan) for lab in labels]
            ax_b.bar(x + i * width, y, width, label=sel)
        ax_b.set_xticks(x + 0.4 - width / 2)
        ax_b.set_xticklabels(labels, fontsize=8)
        ax_b.axhline(0.0, color="k", lw=0.8)
        ax_b.legend(fontsize=8)
    else:
        ax_b.text(0.5, 0.5, "no ssgg baseline in CSV", ha="center", va="center", transform=ax_b.transAxes)
    ax_b.set_ylabel("improvement over SS-GG in N [%]")
    ax_b.set_title("(b) improvement over SS-GG")
    ax_b.grid(alpha=0.3, axis="y")

    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)

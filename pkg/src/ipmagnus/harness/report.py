"""CSV and SVG output.

CSV floats carry 17 significant digits so values round-trip exactly, and
lines end in ``\\n`` on every platform.  SVGs are written with a fixed hash
salt and no date stamp, so identical data gives identical files.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

from ipmagnus.harness.acceptance import group_fits

__all__ = ["CSV_SCHEMAS", "GUIDE_SLOPES", "emit_results", "format_float", "slope_table", "write_verification_report"]

CSV_SCHEMAS = {
    "commscaling": ("experiment", "layers", "N", "h", "max_norm", "seconds"),
    "magnus_local": ("experiment", "p", "N", "dt", "error", "seconds"),
    "magnus_global": ("experiment", "p", "N", "h", "error", "seconds"),
}
GUIDE_SLOPES = {"commscaling": (3, 4), "magnus_local": (3, 5), "magnus_global": (2, 4)}
_AXIS_LABELS = {
    "commscaling": ("h", "max spectral norm"),
    "magnus_local": ("dt", "local error"),
    "magnus_global": ("h = T/L", "global error"),
}


def format_float(x) -> str:
    return format(float(x), ".17g")


def _row_fields(row):
    seconds = "" if row.seconds is None else format_float(row.seconds)
    return [row.experiment, str(row.param), str(row.n_points), format_float(row.x), format_float(row.value), seconds]


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _plot(rows, fits, experiment, path):
    matplotlib.rcParams["svg.hashsalt"] = "ipmagnus"
    xlabel, ylabel = _AXIS_LABELS[experiment]
    tag = "layers" if experiment == "commscaling" else "p"
    curves = defaultdict(list)
    for r in rows:
        curves[(r.param, r.n_points)].append((r.x, r.value))

    fig = Figure(figsize=(6.0, 4.5))
    ax = fig.add_subplot()
    ax.set_xscale("log", base=10)
    ax.set_yscale("log", base=10)
    anchor = None
    for key in sorted(curves):
        pts = sorted(p for p in curves[key] if p[1] > 0)
        if not pts:
            continue
        param, n = key
        label = f"{tag}={param}, N={n}"
        if key in fits:
            full, refit = fits[key]
            label += f" (slope {(refit or full).slope:.2f})"
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
        if anchor is None or pts[-1][0] > anchor[0]:
            anchor = pts[-1]
    if anchor is not None:
        x0, y0 = anchor
        xs = sorted({r.x for r in rows})
        for s in GUIDE_SLOPES[experiment]:
            ys = [y0 * (x / x0) ** s for x in xs]
            ax.plot(xs, ys, linestyle="--", color="gray", linewidth=0.8)
            ax.annotate(f"slope {s}", (xs[0], ys[0]), fontsize=8, color="gray")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})


def emit_results(rows, out_dir, experiment=None, fits=None):
    """Write ``<experiment>.csv`` and, if there are rows, ``<experiment>.svg``.

    Returns the list of paths written.  Raises ``OSError`` when the
    destination is not writable.
    """
    rows = list(rows)
    experiment = experiment or (rows[0].experiment if rows else None)
    if experiment not in CSV_SCHEMAS:
        raise ValueError(f"unknown experiment {experiment!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{experiment}.csv"
    _write_csv(csv_path, CSV_SCHEMAS[experiment], [_row_fields(r) for r in rows])
    written = [csv_path]
    if rows:
        fits = group_fits(rows) if fits is None else fits
        svg_path = out_dir / f"{experiment}.svg"
        _plot(rows, fits, experiment, svg_path)
        written.append(svg_path)
    return written


def slope_table(rows, fits=None) -> str:
    """Plain-text table of fitted slopes, one line per curve."""
    if not rows:
        return "(no rows)"
    fits = group_fits(rows) if fits is None else fits
    tag = "layers" if rows[0].experiment == "commscaling" else "p"
    lines = [f"{tag:>6} {'N':>6} {'slope':>8} {'r^2':>8} {'refit':>8} {'points':>6}"]
    for (param, n), (full, refit) in sorted(fits.items()):
        re = f"{refit.slope:8.3f}" if refit is not None else f"{'-':>8}"
        lines.append(f"{param:>6} {n:>6} {full.slope:8.3f} {full.r_squared:8.4f} {re} {full.points_used:>6}")
    return "\n".join(lines)


def write_verification_report(checks, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "verify_report.csv"
    _write_csv(
        path, ("check", "residual", "threshold", "pass"),
        [[c.name, format_float(c.residual), c.threshold, "true" if c.passed else "false"] for c in checks],
    )
    return path

"""Writers for result tables: CSV, JSON and a minimal SVG line plot."""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

from .experiments import ResultTable

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

# x column and y columns drawn for each suite
PLOTS = {
    "sphere-limit": ("N", ["abs_diff", "free_energy_gap", "relative_width"]),
    "schrodinger-limit": ("hbar", ["abs_diff", "sandwich_width"]),
    "lmg": ("N", ["abs_diff"]),
    "inequalities": ("N", ["log_mid"]),
}


def write_outputs(table: ResultTable, out_dir: str | Path, svg: bool = False) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{table.suite}.csv", out / f"{table.suite}.json"]
    paths[0].write_bytes(table.to_csv().encode("utf-8"))
    paths[1].write_text(table.to_json() + "\n", encoding="utf-8")
    if svg:
        paths.append(out / f"{table.suite}.svg")
        paths[2].write_text(render_svg(table), encoding="utf-8")
    return paths


def _series(table: ResultTable, x: str, y: str) -> list[tuple[float, float]]:
    pts = []
    for row in table.rows:
        xv, yv = row.get(x), row.get(y)
        if isinstance(xv, (int, float)) and isinstance(yv, (int, float)) and yv > 0:
            pts.append((float(xv), float(yv)))
    return pts


def render_svg(table: ResultTable, width: int = 640, height: int = 420) -> str:
    """Log-log polylines of the suite's convergence columns."""
    x_col, y_cols = PLOTS.get(table.suite, ("N", []))
    series = {y: _series(table, x_col, y) for y in y_cols}
    series = {k: v for k, v in series.items() if v}
    margin = 60
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'font-family="sans-serif" font-size="12">',
             f'<rect x="{margin}" y="{margin // 2}" width="{width - 2 * margin}" '
             f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
             f'<text x="{width // 2}" y="{height - 15}" text-anchor="middle">{escape(x_col)} (log)</text>']
    pts = [p for s in series.values() for p in s if p[0] > 0]
    if pts:
        lx = [math.log10(p[0]) for p in pts]
        ly = [math.log10(p[1]) for p in pts]
        x0, x1 = min(lx), max(lx) if max(lx) > min(lx) else min(lx) + 1
        y0, y1 = min(ly), max(ly) if max(ly) > min(ly) else min(ly) + 1

        def sx(v):
            return margin + (math.log10(v) - x0) / (x1 - x0) * (width - 2 * margin)

        def sy(v):
            return height - 1.5 * margin - (math.log10(v) - y0) / (y1 - y0) * (height - 2 * margin)

        for i, (name, s) in enumerate(series.items()):
            color = _PALETTE[i % len(_PALETTE)]
            coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in s if a > 0)
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
            parts.append(f'<text x="{width - margin + 5}" y="{margin + 15 * i}" fill="{color}">'
                         f'{escape(name)}</text>')
        parts.append(f'<text x="{margin}" y="{margin // 2 - 5}">log10 range [{y0:.2f}, {y1:.2f}]</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

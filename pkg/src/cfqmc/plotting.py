"""Static SVG rendering of convergence tables.

Hand-written SVG (no plotting dependency) so reruns are byte-identical.
One log-log panel per (family, dim); solid lines are plain methods, dashed
lines are surrogate-corrected methods; vertical bars show the standard error
of the replicate mean.
"""

from __future__ import annotations

import math

from .bench import CF_METHODS, ConvergenceTable, Row

_PANEL_W = 340
_PANEL_H = 280
_MARGIN_L = 58
_MARGIN_B = 42
_MARGIN_T = 30
_MARGIN_R = 14
_PANELS_PER_ROW = 3

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)


def _curve_label(method: str, k: int) -> str:
    if method in CF_METHODS:
        return f"{method} (k={k})"
    return method


def _finite_rows(rows: list[Row]) -> list[Row]:
    return [r for r in rows if math.isfinite(r.rmse) and r.rmse > 0.0]


def emit_svg(table: ConvergenceTable, path) -> None:
    """Write one panel per (family, dim) with a curve per (method, k)."""
    panels: dict[tuple[str, int], list[Row]] = {}
    for row in table.rows:
        panels.setdefault((row.family, row.dim), []).append(row)
    keys = sorted(panels)
    n_panels = max(1, len(keys))
    n_cols = min(_PANELS_PER_ROW, n_panels)
    n_rows = (n_panels + n_cols - 1) // n_cols
    width = n_cols * _PANEL_W
    height = n_rows * _PANEL_H

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for idx, key in enumerate(keys):
        ox = (idx % n_cols) * _PANEL_W
        oy = (idx // n_cols) * _PANEL_H
        parts.append(_render_panel(key, panels[key], ox, oy))
    parts.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing SVG to {path}: {exc}") from exc


def _render_panel(key: tuple[str, int], rows: list[Row], ox: float, oy: float) -> str:
    family, dim = key
    plot_x0 = ox + _MARGIN_L
    plot_y0 = oy + _MARGIN_T
    plot_w = _PANEL_W - _MARGIN_L - _MARGIN_R
    plot_h = _PANEL_H - _MARGIN_T - _MARGIN_B

    finite = _finite_rows(rows)
    ns = sorted({r.n_total for r in rows})
    if finite:
        lo = min(r.rmse for r in finite)
        hi = max(r.rmse + r.stderr for r in finite)
    else:
        lo, hi = 1e-3, 1.0
    x_lo = math.log2(min(ns)) if ns else 0.0
    x_hi = math.log2(max(ns)) if ns else 1.0
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    y_lo = math.floor(math.log10(lo)) - 0.2
    y_hi = math.ceil(math.log10(hi)) + 0.2

    def sx(n: float) -> float:
        return plot_x0 + (math.log2(n) - x_lo) / (x_hi - x_lo) * plot_w

    def sy(r: float) -> float:
        return plot_y0 + plot_h - (math.log10(r) - y_lo) / (y_hi - y_lo) * plot_h

    out = [
        f'<g><text x="{ox + _PANEL_W / 2:.1f}" y="{oy + 18:.1f}" text-anchor="middle" '
        f'font-size="13">{family} (d={dim})</text>',
        f'<rect x="{plot_x0:.1f}" y="{plot_y0:.1f}" width="{plot_w:.1f}" height="{plot_h:.1f}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    # x ticks on the power-of-two budget grid
    for n in ns:
        x = sx(n)
        out.append(
            f'<line x1="{x:.1f}" y1="{plot_y0 + plot_h:.1f}" x2="{x:.1f}" '
            f'y2="{plot_y0 + plot_h + 4:.1f}" stroke="black" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{x:.1f}" y="{plot_y0 + plot_h + 16:.1f}" text-anchor="middle" '
            f'font-size="9">2^{round(math.log2(n))}</text>'
        )
    out.append(
        f'<text x="{ox + _PANEL_W / 2:.1f}" y="{oy + _PANEL_H - 8:.1f}" text-anchor="middle" '
        'font-size="10">N (log2)</text>'
    )
    # y ticks at decades
    for expo in range(math.ceil(y_lo), math.floor(y_hi) + 1):
        y = sy(10.0**expo)
        out.append(
            f'<line x1="{plot_x0 - 4:.1f}" y1="{y:.1f}" x2="{plot_x0:.1f}" y2="{y:.1f}" '
            'stroke="black" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{plot_x0 - 6:.1f}" y="{y + 3:.1f}" text-anchor="end" '
            f'font-size="9">1e{expo}</text>'
        )
    out.append(
        f'<text x="{ox + 14:.1f}" y="{plot_y0 + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-size="10" transform="rotate(-90 {ox + 14:.1f} {plot_y0 + plot_h / 2:.1f})">'
        "RMSE (log10)</text>"
    )

    curves: dict[tuple[str, int], list[Row]] = {}
    for row in rows:
        curves.setdefault((row.method, row.k), []).append(row)
    for c_idx, c_key in enumerate(sorted(curves)):
        method, k = c_key
        color = _PALETTE[c_idx % len(_PALETTE)]
        dash = ' stroke-dasharray="6,4"' if method in CF_METHODS else ""
        pts = sorted(_finite_rows(curves[c_key]), key=lambda r: r.n_total)
        if pts:
            path_d = " ".join(
                ("M" if i == 0 else "L") + f"{sx(r.n_total):.2f},{sy(r.rmse):.2f}"
                for i, r in enumerate(pts)
            )
            out.append(
                f'<path d="{path_d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>'
            )
            for r in pts:
                hi_b = r.rmse + r.stderr
                lo_b = max(r.rmse - r.stderr, r.rmse * 0.1)  # keep the bar on the log axis
                x = sx(r.n_total)
                out.append(
                    f'<line x1="{x:.2f}" y1="{sy(lo_b):.2f}" x2="{x:.2f}" y2="{sy(hi_b):.2f}" '
                    f'stroke="{color}" stroke-width="1"/>'
                )
        legend_y = plot_y0 + 12 + 12 * c_idx
        out.append(
            f'<line x1="{plot_x0 + plot_w - 92:.1f}" y1="{legend_y - 3:.1f}" '
            f'x2="{plot_x0 + plot_w - 74:.1f}" y2="{legend_y - 3:.1f}" '
            f'stroke="{color}" stroke-width="1.5"{dash}/>'
        )
        out.append(
            f'<text x="{plot_x0 + plot_w - 70:.1f}" y="{legend_y:.1f}" font-size="9">'
            f"{_curve_label(method, k)}</text>"
        )
    out.append("</g>")
    return "\n".join(out)

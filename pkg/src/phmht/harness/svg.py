"""Minimal static SVG rendering of ECDF overlays and QQ scatter grids."""
from __future__ import annotations

import math

W, H, PAD = 320, 240, 30


def _scale(lo, hi, a, b):
    span = (hi - lo) or 1.0
    return lambda v: a + (v - lo) / span * (b - a)


def _frame(x0, y0, title):
    return (f'<g transform="translate({x0},{y0})">'
            f'<rect x="{PAD}" y="{PAD}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" '
            f'fill="none" stroke="#444"/>'
            f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="12">{title}</text>')


def ecdf_panels(ecdf: dict) -> str:
    """2 x 2 grid of ECDF overlays, one polyline per pool."""
    parts = []
    for i, (name, panel) in enumerate(ecdf.items()):
        x0, y0 = (i % 2) * W, (i // 2) * H
        grid = panel["grid"]
        sx = _scale(grid[0], grid[-1], PAD, W - PAD)
        sy = _scale(0.0, 1.0, H - PAD, PAD)
        parts.append(_frame(x0, y0, name))
        for curve in panel["curves"].values():
            pts = " ".join(f"{sx(g):.2f},{sy(v):.2f}" for g, v in zip(grid, curve))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" '
                         f'stroke-opacity="0.4" stroke-width="1"/>')
        parts.append("</g>")
    rows = math.ceil(len(ecdf) / 2)
    return _doc(2 * W, rows * H, parts)


def qq_grid(qq: dict) -> str:
    """One row per panel; each cell is a QQ scatter for a sampled pair."""
    parts = []
    ncol = max((len(v) for v in qq.values()), default=1)
    cw = W // 2
    for r, (name, pairs) in enumerate(qq.items()):
        for c, pair in enumerate(pairs):
            pts = pair["qq"]
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            lo, hi = min(xs + ys), max(xs + ys)
            sx = _scale(lo, hi, 10, cw - 10)
            sy = _scale(lo, hi, cw - 10, 20)
            x0, y0 = c * cw, r * cw
            parts.append(f'<g transform="translate({x0},{y0})">'
                         f'<rect x="10" y="20" width="{cw - 20}" height="{cw - 30}" fill="none" stroke="#444"/>'
                         f'<text x="12" y="14" font-size="8">{name} r={pair["qq_correlation"]:.3f}</text>'
                         f'<line x1="{sx(lo):.1f}" y1="{sy(lo):.1f}" x2="{sx(hi):.1f}" y2="{sy(hi):.1f}" '
                         f'stroke="#bbb"/>')
            for x, y in zip(xs, ys):
                parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="1.2" fill="#d62728"/>')
            parts.append("</g>")
    return _doc(ncol * cw, len(qq) * cw, parts)


def _doc(width, height, parts) -> str:
    body = "\n".join(parts)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'font-family="sans-serif">\n{body}\n</svg>\n')

"""Minimal static SVG emitters for traces and basin grids."""

from __future__ import annotations

import numpy as np

from .metrics import DIVERGED, UNDECIDED, BasinGrid
from .sim import Trace

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
DIVERGED_FILL = "#000000"
UNDECIDED_FILL = "#d9d9d9"


def _polyline(xs, ys, color) -> str:
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>'


def orbit_svg(trace: Trace, width: int = 800, height: int = 400, title: str = "") -> str:
    """Line chart of a_n and c_n against n, with a tick at every regime switch."""
    m = 40
    n = np.arange(len(trace))
    vals = np.concatenate([trace.a, trace.c])
    lo, hi = float(vals.min()), float(vals.max())
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    xmax = max(len(trace) - 1, 1)
    sx = lambda i: m + (width - 2 * m) * i / xmax
    sy = lambda v: height - m - (height - 2 * m) * (v - lo) / (hi - lo)
    xs = [sx(i) for i in n]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{m}" y="20" font-size="12">{title} a (blue), c (orange); min {lo:.6g}, max {hi:.6g}</text>',
        _polyline(xs, [sy(v) for v in trace.a], PALETTE[0]),
        _polyline(xs, [sy(v) for v in trace.c], PALETTE[1]),
    ]
    r = trace.regimes
    for k in np.flatnonzero(r[:-1] != r[1:]):
        x = sx(k + 1)
        parts.append(f'<line x1="{x:.2f}" y1="{height - m}" x2="{x:.2f}" y2="{height - m + 8}" stroke="#d62728"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def basin_svg(grid: BasinGrid, cell: int = 8) -> str:
    rows, cols = grid.labels.shape
    w, h = cols * cell, rows * cell
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}">']
    for i in range(rows):
        y = (rows - 1 - i) * cell  # c increases upwards
        for j in range(cols):
            lab = int(grid.labels[i, j])
            if lab == DIVERGED:
                fill = DIVERGED_FILL
            elif lab == UNDECIDED:
                fill = UNDECIDED_FILL
            else:
                fill = PALETTE[lab % len(PALETTE)]
            parts.append(f'<rect x="{j * cell}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

"""Standalone SVG rendering of curves and ownership rasters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import fmt
from .curves import PathCurve

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


@dataclass
class Style:
    stroke: str = "#000000"
    width: float = 1.5
    fill: str = "none"
    dash: str | None = None
    label: str | None = None


@dataclass
class CellRaster:
    """Cells to paint: ``owners`` maps cell ``(i, j)`` to a droplet index.

    Cell ``(i, j)`` covers ``origin + mesh * [i, i+1] x [j, j+1]``.
    """

    owners: dict
    mesh: float
    origin: tuple = (0.0, 0.0)
    colors: tuple = ("#aec7e8", "#ff9896", "#98df8a", "#ffbb78", "#c5b0d5")
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_state(cls, state) -> "CellRaster":
        owners = {}
        for d in range(state.n):
            for c in state.cells_of(d):
                owners[c] = d
        return cls(owners, state.mesh, tuple(state.surface.origin))

    def runs(self):
        """Horizontal runs ``(j, i_start, length, owner)`` in a fixed order."""
        rows: dict = {}
        for (i, j), d in self.owners.items():
            rows.setdefault(j, []).append((i, d))
        for j in sorted(rows):
            cells = sorted(rows[j])
            start, prev, owner = cells[0][0], cells[0][0], cells[0][1]
            for i, d in cells[1:]:
                if i == prev + 1 and d == owner:
                    prev = i
                    continue
                yield j, start, prev - start + 1, owner
                start, prev, owner = i, i, d
            yield j, start, prev - start + 1, owner


def _bounds(curves, raster):
    xs, ys = [], []
    for c, _ in curves:
        if len(c):
            xs.extend([c.points.real.min(), c.points.real.max()])
            ys.extend([c.points.imag.min(), c.points.imag.max()])
    if raster is not None and raster.owners:
        ij = np.array(list(raster.owners), dtype=float)
        ox, oy = raster.origin
        xs.extend([ox + raster.mesh * ij[:, 0].min(), ox + raster.mesh * (ij[:, 0].max() + 1)])
        ys.extend([oy + raster.mesh * ij[:, 1].min(), oy + raster.mesh * (ij[:, 1].max() + 1)])
    if not xs:
        return 0.0, 0.0, 1.0, 1.0
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 0.03 * span
    return x0 - pad, y0 - pad, x1 - x0 + 2 * pad, y1 - y0 + 2 * pad


def svg_document(curves=(), cells: CellRaster | None = None, width_px: int = 800) -> str:
    """SVG text for ``curves`` (``PathCurve`` or ``(PathCurve, Style)``) and ``cells``."""
    items = []
    for k, c in enumerate(curves):
        if isinstance(c, PathCurve):
            items.append((c, Style(stroke=PALETTE[k % len(PALETTE)])))
        else:
            items.append((c[0], c[1] if isinstance(c[1], Style) else Style(**c[1])))
    x, y, w, h = _bounds(items, cells)
    height_px = max(1, int(round(width_px * h / w)))
    # y axis points up: flip about the horizontal center of the view box.
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width_px}" '
           f'height="{height_px}" viewBox="{fmt(x)} {fmt(-(y + h))} {fmt(w)} {fmt(h)}">',
           '<g transform="scale(1,-1)">']
    if cells is not None:
        ox, oy = cells.origin
        m = cells.mesh
        out.append('<g stroke="none">')
        for j, i0, n, d in cells.runs():
            color = cells.colors[d % len(cells.colors)]
            out.append(f'<rect x="{fmt(ox + m * i0)}" y="{fmt(oy + m * j)}" width="{fmt(m * n)}" '
                       f'height="{fmt(m)}" fill="{color}"/>')
        out.append("</g>")
    stroke_scale = w / width_px
    for c, st in items:
        if len(c) == 0:
            continue
        pts = " ".join(f"{fmt(z.real)},{fmt(z.imag)}" for z in c.points)
        tag = "polygon" if c.closed else "polyline"
        dash = f' stroke-dasharray="{st.dash}"' if st.dash else ""
        title = f"<title>{st.label}</title>" if st.label else ""
        out.append(f'<{tag} points="{pts}" fill="{st.fill}" stroke="{st.stroke}" '
                   f'stroke-width="{fmt(st.width * stroke_scale)}"{dash}>{title}</{tag}>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(curves, path, cells: CellRaster | None = None, width_px: int = 800) -> str:
    """Write an SVG file and return its path."""
    text = svg_document(curves, cells, width_px)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return str(path)

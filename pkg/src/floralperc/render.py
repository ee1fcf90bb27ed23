"""SVG 1.1 rendering of configurations.

Colour map: yellow ``#f2c230``, blue ``#2f5fd0``; hexagon edges are drawn
in a thin grey stroke, irises get a darker outline and highlighted regions
a red one.  Output is plain text built with fixed formatting, so the same
configuration always gives the same bytes.
"""
from __future__ import annotations

from pathlib import Path

from .lattice import SQRT3, HexCoord, edge_midpoint, hex_vertex
from .model import B, Y, Color, Configuration

COLORS = {Y: "#f2c230", B: "#2f5fd0"}
EDGE = "#888888"
IRIS_EDGE = "#333333"
HIGHLIGHT = "#d62728"
MAX_HEXES = 10_000


def _xy(v) -> tuple[float, float]:
    return v.X / 4.0, -v.Y / (4.0 * SQRT3)


def hex_polygons(c: Configuration):
    """(hexagon, part, points, color) for every pure hexagon and every half of a split one."""
    out = []
    for h in sorted(c.domain.hexes):
        st = c.states[h]
        if not st.is_mixed:
            pts = [_xy(hex_vertex(h, j)) for j in range(6)]
            out.append((h, None, pts, st.pure_color))
            continue
        k, _ = st.chord
        for color, start in ((B, k), (Y, k + 3)):
            pts = [_xy(edge_midpoint(h, start % 6))]
            pts += [_xy(hex_vertex(h, (start + i) % 6)) for i in range(3)]
            pts.append(_xy(edge_midpoint(h, (start + 3) % 6)))
            out.append((h, color, pts, color))
    return out


def _pts(pts, scale, ox, oy) -> str:
    return " ".join(f"{(x - ox) * scale:.3f},{(y - oy) * scale:.3f}" for x, y in pts)


def render_svg(c: Configuration, highlight=(), scale: float = 20.0, title: str = "") -> str:
    """SVG text for ``c``.  ``highlight`` is an iterable of hexagons (e.g. one cluster) outlined in red."""
    n = len(c.domain.hexes)
    if n > MAX_HEXES:
        raise ValueError(f"domain too large to render ({n} > {MAX_HEXES} hexagons)")
    polys = hex_polygons(c)
    xs = [x for _, _, pts, _ in polys for x, _ in pts]
    ys = [y for _, _, pts, _ in polys for _, y in pts]
    pad = 0.5
    ox, oy = min(xs) - pad, min(ys) - pad
    w, hgt = (max(xs) - ox + pad) * scale, (max(ys) - oy + pad) * scale
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.3f}" height="{hgt:.3f}" '
        f'viewBox="0 0 {w:.3f} {hgt:.3f}">',
    ]
    if title:
        lines.append(f"<title>{title}</title>")
    lines.append(f'<g stroke="{EDGE}" stroke-width="{0.04 * scale:.3f}" stroke-linejoin="round">')
    for _, _, pts, color in polys:
        lines.append(f'<polygon points="{_pts(pts, scale, ox, oy)}" fill="{COLORS[Color(color)]}"/>')
    lines.append("</g>")
    irises = sorted(c.arrangement.irises)
    if irises:
        lines.append(f'<g fill="none" stroke="{IRIS_EDGE}" stroke-width="{0.08 * scale:.3f}">')
        for h in irises:
            pts = [_xy(hex_vertex(h, j)) for j in range(6)]
            lines.append(f'<polygon points="{_pts(pts, scale, ox, oy)}"/>')
        lines.append("</g>")
    hl = sorted(set(highlight))
    if hl:
        lines.append(f'<g fill="none" stroke="{HIGHLIGHT}" stroke-width="{0.12 * scale:.3f}">')
        for h in hl:
            pts = [_xy(hex_vertex(HexCoord(*h), j)) for j in range(6)]
            lines.append(f'<polygon points="{_pts(pts, scale, ox, oy)}"/>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def save_svg(path, c: Configuration, **kw) -> Path:
    path = Path(path)
    path.write_text(render_svg(c, **kw), encoding="utf-8")
    return path

"""Text and SVG pictures of module supports with fiber dimensions."""

from __future__ import annotations

from .grid_module import GridModule

UNIT = 24


def _plane(m: GridModule):
    if m.dim == 1:
        return {(x[0], 0): d for x, d in m.fibers.items()}
    if m.dim == 2:
        return dict(m.fibers)
    raise ValueError("rendering supports 1D and 2D modules; slice higher-dimensional ones first")


def render_ascii(m: GridModule) -> str:
    """One line per row, top row first; '.' marks a zero fiber inside the bounding box."""
    pts = _plane(m)
    if not pts:
        return "(zero module)\n"
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    width = max(len(str(d)) for d in pts.values())
    lines = []
    for y in range(y1, y0 - 1, -1):
        cells = [str(pts[(x, y)]).rjust(width) if (x, y) in pts else ".".rjust(width)
                 for x in range(x0, x1 + 1)]
        lines.append(" ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def render_svg(m: GridModule) -> str:
    """A square per support vertex labelled with its fiber dimension.

    Coordinates are in units of 24px with the minimal support corner at the
    bottom-left of the picture.
    """
    pts = _plane(m)
    if not pts:
        return '<svg xmlns="http://www.w3.org/2000/svg" width="0" height="0"></svg>\n'
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, y0 = min(xs), min(ys)
    w = (max(xs) - x0 + 1) * UNIT
    h = (max(ys) - y0 + 1) * UNIT
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">']
    for (x, y) in sorted(pts):
        px = (x - x0) * UNIT
        py = h - (y - y0 + 1) * UNIT
        out.append(f'<rect x="{px}" y="{py}" width="{UNIT}" height="{UNIT}" '
                   f'fill="#dde6f0" stroke="#333" stroke-width="1"/>')
        out.append(f'<text x="{px + UNIT // 2}" y="{py + UNIT // 2 + 4}" font-size="12" '
                   f'text-anchor="middle" font-family="monospace">{pts[(x, y)]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

"""Deterministic SVG rendering of robot routes over node positions."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .decode import Solution
from .instance import Instance

# robot 1 red, robot 2 blue, robot 3 yellow, then the rest
PALETTE = ("#d62728", "#1f4fd8", "#e6b800", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")
DEPOT_FILL = "#ffd700"
PRODUCT_FILL = "#4a7bd0"

SIZE = 480
MARGIN = 40


class PlotError(ValueError):
    pass


def render_svg(solution: Solution, instance: Instance, title: str | None = None) -> str:
    if not instance.has_positions:
        raise PlotError("instance has no node positions; plot needs a positioned instance (euclidean/manhattan or explicit with pos)")
    pts = [node.position for node in instance.nodes]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    scale = (SIZE - 2 * MARGIN) / span

    def xy(k):
        x, y = pts[k]
        # SVG y grows downward
        return MARGIN + (x - min(xs)) * scale, SIZE - MARGIN - (y - min(ys)) * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE + 30}" '
        f'viewBox="0 0 {SIZE} {SIZE + 30}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE + 30}" fill="#ffffff"/>',
    ]
    if title is None:
        title = f"total distance {solution.total_distance:.3f}, robots used {solution.robots_used}"
    out.append(f'<text x="{SIZE / 2:.2f}" y="{SIZE + 18}" font-family="sans-serif" font-size="14" '
               f'text-anchor="middle">{escape(title)}</text>')

    out.append('<g id="routes" fill="none" stroke-width="3" stroke-linejoin="round">')
    for p, route in enumerate(solution.routes):
        if all(node == 0 for node in route):
            continue
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(xy, route))
        color = PALETTE[p % len(PALETTE)]
        out.append(f'<polyline class="route" data-robot="{p + 1}" stroke="{color}" points="{points}"/>')
    out.append("</g>")

    out.append('<g id="nodes" font-family="sans-serif" font-size="12" text-anchor="middle">')
    for k in range(len(pts)):
        x, y = xy(k)
        if k == 0:
            out.append(f'<rect class="depot" x="{x - 11:.2f}" y="{y - 11:.2f}" width="22" height="22" '
                       f'fill="{DEPOT_FILL}" stroke="#000000" stroke-width="1.5"/>')
            label_fill = "#000000"
        else:
            out.append(f'<circle class="product" cx="{x:.2f}" cy="{y:.2f}" r="11" fill="{PRODUCT_FILL}" '
                       f'stroke="#000000" stroke-width="1"/>')
            label_fill = "#ffffff"
        out.append(f'<text x="{x:.2f}" y="{y + 4:.2f}" fill="{label_fill}">{k}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

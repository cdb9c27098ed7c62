"""Byte-deterministic SVG scatter plots.

SVG is assembled directly (plain SVG 1.1, no external resources, no
timestamps) so identical inputs produce identical bytes. Conventions follow
the analysis figures: circles are training/reference points, X glyphs are
projected points, and party coloring is blue for Democrats, red for
Republicans, grey for everyone else. Axes are hidden by default because the
embedding coordinates carry no substantive meaning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

PARTY_PALETTE = {
    "Democrat": "#2c5fad",
    "Republican": "#c23b3b",
    "Independent/Other": "#8a8a8a",
}

ERA_PALETTE = {
    "PreCovid": "#3b7d5e",
    "Covid": "#b8762c",
}

# fixed cycle for arbitrary label values, assigned by sorted label order
LABEL_CYCLE = (
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
    "#937860", "#da8bc3", "#8c8c8c", "#ccb974", "#64b5cd",
)

_FALLBACK_COLOR = "#444444"


def _fmt(x: float) -> str:
    return f"{x:.2f}"


@dataclass(frozen=True)
class PlotStyle:
    width: int = 640
    height: int = 640
    margin: float = 40.0
    point_radius: float = 3.0
    cross_arm: float = 3.4
    show_axes: bool = False
    title: str | None = None


def color_map_for(color_by: str, values: list[str]) -> dict[str, str]:
    if color_by == "party":
        return dict(PARTY_PALETTE)
    if color_by == "era":
        return dict(ERA_PALETTE)
    if color_by == "label":
        unique = sorted(set(values))
        return {
            v: LABEL_CYCLE[i % len(LABEL_CYCLE)] for i, v in enumerate(unique)
        }
    raise ArgumentError(f"unknown color-by field {color_by!r}")


def _bounds(coord_sets: list[np.ndarray]) -> tuple[float, float, float, float]:
    allc = np.vstack([c for c in coord_sets if c.size])
    x_lo, y_lo = allc[:, 0].min(), allc[:, 1].min()
    x_hi, y_hi = allc[:, 0].max(), allc[:, 1].max()
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    return float(x_lo), float(x_hi), float(y_lo), float(y_hi)


def _scale(style: PlotStyle, bounds):
    x_lo, x_hi, y_lo, y_hi = bounds
    inner_w = style.width - 2 * style.margin
    inner_h = style.height - 2 * style.margin

    def to_px(x: float, y: float) -> tuple[float, float]:
        px = style.margin + (x - x_lo) / (x_hi - x_lo) * inner_w
        py = style.height - style.margin - (y - y_lo) / (y_hi - y_lo) * inner_h
        return px, py

    return to_px


def _circle(px: float, py: float, r: float, color: str) -> str:
    return (
        f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(r)}" '
        f'fill="{color}" fill-opacity="0.75" class="pt-circle"/>'
    )


def _cross(px: float, py: float, arm: float, color: str) -> str:
    x1, x2 = px - arm, px + arm
    y1, y2 = py - arm, py + arm
    return (
        f'<path d="M{_fmt(x1)} {_fmt(y1)} L{_fmt(x2)} {_fmt(y2)} '
        f'M{_fmt(x1)} {_fmt(y2)} L{_fmt(x2)} {_fmt(y1)}" '
        f'stroke="{color}" stroke-width="1.6" fill="none" class="pt-cross"/>'
    )


def scatter_svg(
    reference_coords: np.ndarray,
    reference_colors: list[str],
    projected_coords: np.ndarray | None = None,
    projected_colors: list[str] | None = None,
    legend: dict[str, str] | None = None,
    style: PlotStyle | None = None,
) -> str:
    """Render reference points as circles and projected points as X glyphs.

    ``reference_colors``/``projected_colors`` are per-point fill colors;
    ``legend`` maps label text to color swatches.
    """
    style = style or PlotStyle()
    reference_coords = np.asarray(reference_coords, dtype=np.float64)
    coord_sets = [reference_coords]
    if projected_coords is not None:
        projected_coords = np.asarray(projected_coords, dtype=np.float64)
        coord_sets.append(projected_coords)
    to_px = _scale(style, _bounds(coord_sets))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{style.width}" height="{style.height}" '
        f'viewBox="0 0 {style.width} {style.height}">',
        f'<rect width="{style.width}" height="{style.height}" fill="#ffffff"/>',
    ]

    if style.show_axes:
        m = style.margin
        parts.append(
            f'<rect x="{_fmt(m)}" y="{_fmt(m)}" '
            f'width="{_fmt(style.width - 2 * m)}" '
            f'height="{_fmt(style.height - 2 * m)}" '
            f'fill="none" stroke="#444444" stroke-width="1"/>'
        )

    if style.title:
        parts.append(
            f'<text x="{_fmt(style.width / 2)}" y="22" font-family="sans-serif" '
            f'font-size="14" text-anchor="middle" fill="#222222">'
            f"{_escape(style.title)}</text>"
        )

    for i in range(reference_coords.shape[0]):
        px, py = to_px(reference_coords[i, 0], reference_coords[i, 1])
        parts.append(_circle(px, py, style.point_radius, reference_colors[i]))

    if projected_coords is not None:
        colors = projected_colors or [_FALLBACK_COLOR] * projected_coords.shape[0]
        for i in range(projected_coords.shape[0]):
            px, py = to_px(projected_coords[i, 0], projected_coords[i, 1])
            parts.append(_cross(px, py, style.cross_arm, colors[i]))

    if legend:
        lx = style.width - style.margin - 150.0
        ly = style.margin + 6.0
        for offset, label in enumerate(sorted(legend)):
            y = ly + offset * 18.0
            parts.append(
                f'<rect x="{_fmt(lx)}" y="{_fmt(y - 9)}" width="12" height="12" '
                f'fill="{legend[label]}"/>'
            )
            parts.append(
                f'<text x="{_fmt(lx + 18)}" y="{_fmt(y + 1)}" '
                f'font-family="sans-serif" font-size="12" fill="#222222">'
                f"{_escape(label)}</text>"
            )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def panel_svg(panels: list[tuple[str, str]], n_cols: int, panel_size: int = 320) -> str:
    """Compose pre-rendered square panels into one figure grid.

    ``panels`` are (title, svg_text) pairs; each inner SVG is inlined at its
    grid cell via a nested <svg> element.
    """
    if not panels:
        raise ArgumentError("no panels to compose")
    n_cols = max(1, n_cols)
    n_rows = (len(panels) + n_cols - 1) // n_cols
    width = n_cols * panel_size
    height = n_rows * (panel_size + 20)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    for idx, (title, inner) in enumerate(panels):
        row, col = divmod(idx, n_cols)
        ox = col * panel_size
        oy = row * (panel_size + 20)
        parts.append(
            f'<text x="{_fmt(ox + panel_size / 2)}" y="{_fmt(oy + 14)}" '
            f'font-family="sans-serif" font-size="12" text-anchor="middle" '
            f'fill="#222222">{_escape(title)}</text>'
        )
        body = _strip_svg_document(inner)
        parts.append(
            f'<svg x="{ox}" y="{oy + 20}" width="{panel_size}" '
            f'height="{panel_size}" viewBox="0 0 640 640" class="panel">'
        )
        parts.append(body)
        parts.append("</svg>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _strip_svg_document(svg_text: str) -> str:
    """Drop the XML declaration and outer <svg> wrapper, keep the body."""
    lines = svg_text.strip().split("\n")
    body = [
        line
        for line in lines
        if not line.startswith("<?xml") and not line.startswith("<svg ")
    ]
    if body and body[-1] == "</svg>":
        body = body[:-1]
    return "\n".join(body)


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )

"""Minimal self-contained SVG chart rendering for CLI artifacts.

Every data mark carries data-* attributes so tests can parse values back out.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

WIDTH = 640
HEIGHT = 480
MARGIN = 50

CLASS_COLORS = ("#2e7d32", "#f9a825", "#c62828")  # good / initial / progressed


def _axes(x_min, x_max, y_min, y_max):
    if x_max == x_min:
        x_max = x_min + 1.0
    if y_max == y_min:
        y_max = y_min + 1.0
    sx = (WIDTH - 2 * MARGIN) / (x_max - x_min)
    sy = (HEIGHT - 2 * MARGIN) / (y_max - y_min)

    def to_px(x, y):
        return (MARGIN + (x - x_min) * sx, HEIGHT - MARGIN - (y - y_min) * sy)

    return to_px


def _document(body: list[str], title: str) -> str:
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
        f'<title>{title}</title>',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def scatter_svg(points: np.ndarray, labels: Optional[np.ndarray] = None,
                queries: Optional[np.ndarray] = None,
                segments: Optional[Sequence[tuple[int, int]]] = None,
                title: str = "scatter") -> str:
    """Class-colored 2-D scatter with optional query points and neighbor segments."""
    points = np.asarray(points, dtype=float)
    allx = points[:, 0].tolist()
    ally = points[:, 1].tolist()
    if queries is not None and len(queries):
        allx += list(np.asarray(queries)[:, 0])
        ally += list(np.asarray(queries)[:, 1])
    to_px = _axes(min(allx), max(allx), min(ally), max(ally))
    body = []
    if segments and queries is not None:
        for qi, ti in segments:
            x1, y1 = to_px(*np.asarray(queries)[qi])
            x2, y2 = to_px(*points[ti])
            body.append(f'<line class="segment" x1="{x1:.2f}" y1="{y1:.2f}" '
                        f'x2="{x2:.2f}" y2="{y2:.2f}" stroke="#888" stroke-width="1"/>')
    for i, (x, y) in enumerate(points.tolist()):
        color = CLASS_COLORS[int(labels[i])] if labels is not None else "#1565c0"
        px, py = to_px(x, y)
        body.append(f'<circle class="pt" cx="{px:.2f}" cy="{py:.2f}" r="3" '
                    f'fill="{color}" fill-opacity="0.6" data-x="{x!r}" data-y="{y!r}"/>')
    if queries is not None:
        for x, y in np.asarray(queries).tolist():
            px, py = to_px(x, y)
            body.append(f'<circle class="query" cx="{px:.2f}" cy="{py:.2f}" r="5" '
                        f'fill="none" stroke="black" stroke-width="2" '
                        f'data-x="{x!r}" data-y="{y!r}"/>')
    return _document(body, title)


def line_chart_svg(xs: Sequence[float], series: dict[str, Sequence[float]],
                   title: str = "line chart", x_label: str = "x") -> str:
    """One polyline per named series, with per-point markers."""
    xs = [float(x) for x in xs]
    series = {name: [float(v) for v in ys] for name, ys in series.items()}
    all_y = [v for ys in series.values() for v in ys]
    to_px = _axes(min(xs), max(xs), min(all_y), max(all_y))
    palette = ("#1565c0", "#c62828", "#2e7d32", "#6a1b9a")
    body = []
    for si, (name, ys) in enumerate(series.items()):
        color = palette[si % len(palette)]
        pts = " ".join("{:.2f},{:.2f}".format(*to_px(x, y)) for x, y in zip(xs, ys))
        body.append(f'<polyline class="series" data-name="{name}" points="{pts}" '
                    f'fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in zip(xs, ys):
            px, py = to_px(x, y)
            body.append(f'<circle class="pt" cx="{px:.2f}" cy="{py:.2f}" r="3" '
                        f'fill="{color}" data-series="{name}" data-x="{x!r}" data-y="{y!r}"/>')
        body.append(f'<text x="{WIDTH - MARGIN}" y="{30 + 15 * si}" text-anchor="end" '
                    f'font-size="12" fill="{color}">{name}</text>')
    body.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle" '
                f'font-size="12">{x_label}</text>')
    return _document(body, title)


def bar_chart_svg(names: Sequence[str], values: Sequence[float],
                  title: str = "bar chart") -> str:
    """Horizontal signed bars: green to the right for positive, red to the left."""
    n = len(names)
    values = [float(v) for v in values]
    vmax = max(abs(v) for v in values) or 1.0
    center = WIDTH / 2
    scale = (WIDTH / 2 - MARGIN) / vmax
    row_h = (HEIGHT - 2 * MARGIN) / max(n, 1)
    body = [f'<line x1="{center}" y1="{MARGIN}" x2="{center}" '
            f'y2="{HEIGHT - MARGIN}" stroke="#444"/>']
    for i, (name, v) in enumerate(zip(names, values)):
        y = MARGIN + i * row_h + row_h * 0.2
        h = row_h * 0.6
        w = abs(v) * scale
        x = center if v >= 0 else center - w
        color = "#2e7d32" if v >= 0 else "#c62828"
        body.append(f'<rect class="bar" x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" '
                    f'height="{h:.2f}" fill="{color}" data-name="{name}" data-value="{v!r}"/>')
        body.append(f'<text x="{MARGIN}" y="{y + h / 2 + 4:.2f}" font-size="11">{name}</text>')
    return _document(body, title)

"""Static SVG emission for spiral sets and pseudospectrum overlays.

Hand-rolled writer: figures are a unit-disc viewport with polyline paths
for parameter sweeps and square/circle glyphs for point clouds.  No
dependency on a plotting stack; output is diff-able text.
"""

from __future__ import annotations

import numpy as np

VIEW = 480
PAD = 1.25  # complex plane half-width mapped onto the viewport

PATH_COLORS = ("#1f6fb2", "#b2421f", "#3a8f3a", "#7a3ab2", "#b28f1f")


def _xy(z: complex) -> tuple[float, float]:
    return (
        (z.real + PAD) / (2 * PAD) * VIEW,
        (PAD - z.imag) / (2 * PAD) * VIEW,
    )


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def polyline(points: np.ndarray, color: str, width: float = 1.0) -> str:
    coords = " ".join(
        f"{_fmt(x)},{_fmt(y)}" for x, y in (_xy(z) for z in points)
    )
    return (
        f'<polyline fill="none" stroke="{color}" '
        f'stroke-width="{width}" points="{coords}"/>'
    )


def scatter(points: np.ndarray, color: str, r: float = 1.6, shape: str = "circle") -> str:
    out = []
    for z in points:
        x, y = _xy(z)
        if shape == "circle":
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r}" fill="{color}"/>')
        else:
            h = r
            out.append(
                f'<rect x="{_fmt(x - h)}" y="{_fmt(y - h)}" width="{_fmt(2 * h)}" '
                f'height="{_fmt(2 * h)}" fill="{color}"/>'
            )
    return "".join(out)


def unit_circle_guide() -> str:
    x, y = _xy(0j)
    r = VIEW / (2 * PAD)
    return (
        f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" fill="none" '
        'stroke="#999999" stroke-width="0.8" stroke-dasharray="4 3" '
        'class="unit-circle-guide"/>'
    )


def document(elements: list[str], title: str = "") -> str:
    body = "\n".join(elements)
    head = f"<title>{title}</title>\n" if title else ""
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{VIEW}" '
        f'height="{VIEW}" viewBox="0 0 {VIEW} {VIEW}">\n{head}'
        f'<rect width="{VIEW}" height="{VIEW}" fill="white"/>\n'
        f"{body}\n</svg>\n"
    )


def spiral_figure(paths: list[np.ndarray], title: str = "predicted spiral set") -> str:
    """Unit-circle guide plus one polyline path per cluster pair."""
    els = [unit_circle_guide()]
    for k, p in enumerate(paths):
        els.append(polyline(p, PATH_COLORS[k % len(PATH_COLORS)], 1.0))
    return document(els, title)


def overlay_figure(
    level_sets: list[tuple[float, np.ndarray]],
    predicted: np.ndarray,
    title: str = "predicted set over pseudospectrum levels",
) -> str:
    """Pseudospectrum level points as squares under the predicted cloud."""
    els = [unit_circle_guide()]
    shades = ("#c9dcef", "#9fc2e3", "#6ea3d4")
    for k, (eps, pts) in enumerate(level_sets):
        els.append(
            f"<!-- level eps={eps:g}: {pts.size} points -->"
        )
        els.append(scatter(pts, shades[k % len(shades)], 2.2, "rect"))
    els.append(scatter(predicted, "#b2421f", 1.2, "circle"))
    return document(els, title)

"""Scatter-plot SVG emission without a plotting dependency.

One fixed 800x800 viewbox; the axis window is the joint data extent plus a
10% margin on each side. Real samples are drawn first in grey, generated
samples on top in color, so overlap stays readable.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SIZE", "scatter_svg"]

SIZE = 800
_MARGIN = 0.10
_REAL_FILL = "#9e9e9e"
_FAKE_FILL = "#d6336c"
_POINT_R = 3.0


def _window(real: np.ndarray, fake: np.ndarray) -> tuple:
    both = np.vstack([real, fake])
    lo = both.min(axis=0)
    hi = both.max(axis=0)
    span = hi - lo
    # a flat cloud still needs a finite window
    span = np.where(span > 0, span, 1.0)
    return lo - _MARGIN * span, hi + _MARGIN * span


def _circles(pts: np.ndarray, lo, hi, fill: str) -> str:
    scale = SIZE / (hi - lo)
    xs = (pts[:, 0] - lo[0]) * scale[0]
    # svg y runs downward; flip so the plot reads like normal axes
    ys = SIZE - (pts[:, 1] - lo[1]) * scale[1]
    rows = "".join(
        f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{_POINT_R}"/>'
        for x, y in zip(xs, ys))
    return f'<g fill="{fill}" fill-opacity="0.75">{rows}</g>'


def scatter_svg(real, fake) -> str:
    """Render two 2-D point clouds as one SVG document string."""
    real = np.asarray(real, dtype=np.float64)
    fake = np.asarray(fake, dtype=np.float64)
    for name, pts in (("real", real), ("fake", fake)):
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError(
                f"{name} must be a non-empty (n, 2) array, got {pts.shape}")
    lo, hi = _window(real, fake)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="0 0 {SIZE} {SIZE}" width="{SIZE}" height="{SIZE}">'
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>'
        + _circles(real, lo, hi, _REAL_FILL)
        + _circles(fake, lo, hi, _FAKE_FILL)
        + "</svg>\n"
    )

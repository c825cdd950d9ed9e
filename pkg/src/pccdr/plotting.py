"""Scatter-plot emission: SVG for 2-D embeddings, RGB CSV for 3-D ones.

SVG keeps the artifact dependency-free: one <circle> element per point, a
categorical palette when integer labels are given, or a two-color
interpolation when coloring by distance from a chosen reference row. The
viewport auto-fits the data bounds with a 5% margin.
"""
from __future__ import annotations

import numpy as np

from .data import as_values
from .errors import InvalidInput

# the familiar 10-color categorical palette
PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

# near-to-far endpoints for distance coloring
NEAR_COLOR = (31, 119, 180)
FAR_COLOR = (255, 127, 14)

DEFAULT_SIZE = 640.0
MARGIN_FRACTION = 0.05


def distance_colors(data, reference_row: int) -> np.ndarray:
    """Per-point distances from data[reference_row], min-max scaled to [0, 1]."""
    x = as_values(data)
    n = x.shape[0]
    if not 0 <= reference_row < n:
        raise InvalidInput(f"reference row {reference_row} outside [0, {n})")
    d = np.linalg.norm(x - x[reference_row], axis=1)
    span = d.max() - d.min()
    if span == 0:
        return np.zeros(n)
    return (d - d.min()) / span


def _interp_hex(t: float) -> str:
    rgb = tuple(
        int(round(a + t * (b - a))) for a, b in zip(NEAR_COLOR, FAR_COLOR)
    )
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _fills(n: int, labels, shades) -> list[str]:
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (n,):
            raise InvalidInput(f"labels must have shape ({n},), got {labels.shape}")
        classes = {lab: i for i, lab in enumerate(sorted(set(labels.tolist())))}
        return [PALETTE[classes[lab] % len(PALETTE)] for lab in labels.tolist()]
    if shades is not None:
        shades = np.asarray(shades, dtype=np.float64)
        if shades.shape != (n,):
            raise InvalidInput(f"shades must have shape ({n},), got {shades.shape}")
        return [_interp_hex(float(t)) for t in shades]
    return [PALETTE[0]] * n


def scatter_svg(
    embedding,
    labels=None,
    shades=None,
    size: float = DEFAULT_SIZE,
    radius: float = 3.0,
) -> str:
    """Render a 2-D embedding as an SVG string with one circle per point.

    Color priority: integer `labels` (categorical palette), then `shades`
    (values in [0, 1] interpolated near-to-far), then a single default color.
    """
    emb = as_values(embedding)
    if emb.shape[1] != 2:
        raise InvalidInput(
            f"scatter_svg needs a 2-D embedding, got {emb.shape[1]} columns"
        )
    n = emb.shape[0]
    fills = _fills(n, labels, shades)

    lo = emb.min(axis=0)
    hi = emb.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    margin = MARGIN_FRACTION * span
    lo_v = lo - margin
    extent = span + 2 * margin
    scale = size / extent.max()
    width = extent[0] * scale
    height = extent[1] * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1f}" '
        f'height="{height:.1f}" viewBox="0 0 {width:.1f} {height:.1f}">',
        f'<rect width="{width:.1f}" height="{height:.1f}" fill="white"/>',
    ]
    for i in range(n):
        cx = (emb[i, 0] - lo_v[0]) * scale
        cy = height - (emb[i, 1] - lo_v[1]) * scale  # y grows upward in data space
        parts.append(
            f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{radius}" '
            f'fill="{fills[i]}" fill-opacity="0.8"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def rgb_rows(embedding) -> np.ndarray:
    """Min-max normalize each embedding column to an integer channel in [0, 255].

    Used for 3-D embeddings, whose coordinates map directly to red, green and
    blue; constant columns map to 0.
    """
    emb = as_values(embedding)
    if emb.shape[1] != 3:
        raise InvalidInput(f"rgb_rows needs a 3-D embedding, got {emb.shape[1]} columns")
    lo = emb.min(axis=0)
    span = emb.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = (emb - lo) / safe * 255.0
    return np.clip(np.rint(scaled), 0, 255).astype(np.int64)


def save_rgb_csv(embedding, path) -> None:
    rows = rgb_rows(embedding)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r, g, b in rows:
            fh.write(f"{r},{g},{b}\n")

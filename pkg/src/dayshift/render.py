"""Deterministic rendering of detection overlays and comparison grids."""

import warnings

import numpy as np
from PIL import Image, ImageDraw

# one fixed color per class index
CLASS_COLORS = (
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
)


def render_overlay(image, detections, class_names):
    """Draw one rectangle plus a "class score" label per detection."""
    img = Image.fromarray(np.asarray(image, dtype=np.uint8))
    draw = ImageDraw.Draw(img)
    w, h = img.size
    for det in detections:
        x0, y0, x1, y1 = det.box
        if min(x0, y0) < 0.0 or max(x1, y1) > 1.0:
            warnings.warn(f"clamping out-of-range box {det.box}")
        x0, y0, x1, y1 = (min(max(v, 0.0), 1.0) for v in (x0, y0, x1, y1))
        color = CLASS_COLORS[det.class_id % len(CLASS_COLORS)]
        px0, py0 = round(x0 * (w - 1)), round(y0 * (h - 1))
        px1, py1 = round(x1 * (w - 1)), round(y1 * (h - 1))
        draw.rectangle([px0, py0, px1, py1], outline=color, width=2)
        label = f"{class_names[det.class_id]} {det.score:.2f}"
        draw.text((px0 + 2, py0 + 2), label, fill=color)
    return np.asarray(img)


def render_comparison_grid(rows, pad=4, pad_value=255):
    """Row-major grid of equally sized images with uniform padding."""
    if not rows or any(not row for row in rows):
        raise ValueError("grid rows must be non-empty")
    n_cols = len(rows[0])
    if any(len(row) != n_cols for row in rows):
        raise ValueError("ragged grid: all rows must have the same length")
    tiles = [np.asarray(img, dtype=np.uint8) for row in rows for img in row]
    h, w, c = tiles[0].shape
    if any(t.shape != (h, w, c) for t in tiles):
        raise ValueError("all grid images must share one shape")
    n_rows = len(rows)
    out = np.full(
        (n_rows * h + (n_rows + 1) * pad, n_cols * w + (n_cols + 1) * pad, c),
        pad_value, dtype=np.uint8)
    for r in range(n_rows):
        for col in range(n_cols):
            top = pad + r * (h + pad)
            left = pad + col * (w + pad)
            out[top:top + h, left:left + w] = tiles[r * n_cols + col]
    return out

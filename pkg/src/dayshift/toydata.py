"""Synthetic desk-scale datasets: no downloads needed for any run.

Translation toyset: paired dim ("night") and bright ("day") renderings of
the same random rectangle scenes, with a correspondence file. Detection
toyset: scenes whose colored rectangles map one-to-one onto the six
detection classes, with a manifest.
"""

import os

import numpy as np
from PIL import Image

from .data import CLASS_NAMES

# one distinctive object color per class
TOY_CLASS_COLORS = (
    (220, 40, 40),    # bike
    (40, 200, 60),    # bus
    (50, 90, 230),    # car
    (240, 200, 40),   # people
    (230, 90, 200),   # sign
    (40, 220, 220),   # traffic_sign
)

NIGHT_FACTOR = 0.25


def _random_scene(rng, size, n_shapes=4):
    img = np.empty((size, size, 3), dtype=np.uint8)
    sky = rng.integers(170, 230)
    ground = rng.integers(120, 180)
    horizon = size // 2 + int(rng.integers(-size // 8, size // 8))
    img[:horizon] = (sky, sky, min(255, sky + 20))
    img[horizon:] = (ground, ground, ground)
    for _ in range(n_shapes):
        color = rng.integers(40, 255, size=3)
        x0, y0 = rng.integers(0, size - 8, size=2)
        w, h = rng.integers(4, size // 3, size=2)
        img[y0:y0 + h, x0:x0 + w] = color
    return img


def make_translation_toyset(root, n=16, size=64, seed=0):
    """Write ``night/``, ``day/`` and ``correspondences.csv`` under root."""
    rng = np.random.default_rng(seed)
    night_dir = os.path.join(root, "night")
    day_dir = os.path.join(root, "day")
    os.makedirs(night_dir, exist_ok=True)
    os.makedirs(day_dir, exist_ok=True)
    for i in range(n):
        day = _random_scene(rng, size)
        night = (day.astype(np.float64) * NIGHT_FACTOR).astype(np.uint8)
        Image.fromarray(day).save(os.path.join(day_dir, f"img_{i:03d}.png"))
        Image.fromarray(night).save(os.path.join(night_dir, f"img_{i:03d}.png"))
    corr_path = os.path.join(root, "correspondences.csv")
    with open(corr_path, "w") as fh:
        for i in range(n):
            fh.write(f"{i},{i}\n")
    return night_dir, day_dir, corr_path


def make_detection_toyset(root, n=8, size=128, seed=0, max_objects=2):
    """Write detection images plus ``manifest.tsv`` under root; returns its path."""
    rng = np.random.default_rng(seed)
    image_dir = os.path.join(root, "images")
    os.makedirs(image_dir, exist_ok=True)
    manifest_path = os.path.join(root, "manifest.tsv")
    lines = []
    for i in range(n):
        img = np.empty((size, size, 3), dtype=np.uint8)
        bg = rng.integers(90, 140)
        img[:] = (bg, bg, bg)
        img = (img.astype(np.int16) + rng.integers(-10, 11, img.shape)).clip(0, 255).astype(np.uint8)
        records = []
        for _ in range(int(rng.integers(1, max_objects + 1))):
            class_id = int(rng.integers(0, len(CLASS_NAMES)))
            w = float(rng.uniform(0.25, 0.45))
            h = float(rng.uniform(0.25, 0.45))
            x0 = float(rng.uniform(0.02, 0.98 - w))
            y0 = float(rng.uniform(0.02, 0.98 - h))
            px0, py0 = int(x0 * size), int(y0 * size)
            px1, py1 = int((x0 + w) * size), int((y0 + h) * size)
            img[py0:py1, px0:px1] = TOY_CLASS_COLORS[class_id]
            records.append(
                f"{CLASS_NAMES[class_id]},{x0:.6f},{y0:.6f},{x0 + w:.6f},{y0 + h:.6f}"
            )
        name = f"det_{i:03d}.png"
        Image.fromarray(img).save(os.path.join(image_dir, name))
        lines.append(f"images/{name}\t{';'.join(records)}")
    with open(manifest_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return manifest_path

"""Prior-box (anchor) generation across feature-map scales.

Ordering is map-major, then row-major over cells, then ratio-minor within
a cell (listed ratios first, the intermediate-scale square box last).
"""

import json
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class LayoutEntry:
    fmap_size: int
    scale: float
    next_scale: float
    ratios: Tuple[float, ...]

    @property
    def boxes_per_cell(self):
        return len(self.ratios) + 1


@dataclass(frozen=True)
class AnchorSet:
    anchors: np.ndarray  # [A, 4] center-form (cx, cy, w, h), unclamped
    layout: Tuple[LayoutEntry, ...]

    def __len__(self):
        return self.anchors.shape[0]


def generate_anchors(layout):
    """Tile anchors over every feature map of the layout.

    Cell (i, j) of an f x f map centers at ((j + 0.5) / f, (i + 0.5) / f).
    Each ratio r produces (w, h) = (s * sqrt(r), s / sqrt(r)); one extra
    square box uses the intermediate scale sqrt(s * next_scale).
    """
    layout = tuple(layout)
    if not layout:
        raise ConfigError("anchor layout must be non-empty")
    boxes = []
    for entry in layout:
        if entry.fmap_size < 1:
            raise ConfigError(f"feature map size must be >= 1, got {entry.fmap_size}")
        if not (0.0 < entry.scale <= 1.0):
            raise ConfigError(f"scale must be in (0, 1], got {entry.scale}")
        if entry.next_scale <= 0:
            raise ConfigError(f"next scale must be positive, got {entry.next_scale}")
        if any(r <= 0 for r in entry.ratios):
            raise ConfigError(f"aspect ratios must be positive, got {entry.ratios}")
        f = entry.fmap_size
        s = entry.scale
        s_prime = math.sqrt(s * entry.next_scale)
        cell_boxes = [(s * math.sqrt(r), s / math.sqrt(r)) for r in entry.ratios]
        cell_boxes.append((s_prime, s_prime))
        for i in range(f):
            cy = (i + 0.5) / f
            for j in range(f):
                cx = (j + 0.5) / f
                for w, h in cell_boxes:
                    boxes.append((cx, cy, w, h))
    return AnchorSet(np.asarray(boxes, dtype=np.float64), layout)


def anchor_count(layout):
    """Closed-form anchor count: sum of f^2 * (len(ratios) + 1)."""
    return sum(e.fmap_size ** 2 * (len(e.ratios) + 1) for e in layout)


def full_300_layout():
    """Six-map layout for 300px inputs; scales linear from 0.2 to 0.9."""
    fmap_sizes = (38, 19, 10, 5, 3, 1)
    scales = [0.2 + i * (0.9 - 0.2) / 5 for i in range(6)] + [1.0]
    ratio_sets = (
        (1.0, 2.0, 0.5),
        (1.0, 2.0, 0.5, 3.0, 1.0 / 3.0),
        (1.0, 2.0, 0.5, 3.0, 1.0 / 3.0),
        (1.0, 2.0, 0.5, 3.0, 1.0 / 3.0),
        (1.0, 2.0, 0.5),
        (1.0, 2.0, 0.5),
    )
    return tuple(
        LayoutEntry(f, scales[i], scales[i + 1], ratio_sets[i])
        for i, f in enumerate(fmap_sizes)
    )


def desk_layout():
    """Two-map layout (8x8 and 4x4) for fast CPU runs on 128px inputs."""
    return (
        LayoutEntry(8, 0.3, 0.6, (1.0, 2.0, 0.5)),
        LayoutEntry(4, 0.6, 0.9, (1.0, 2.0, 0.5)),
    )


def layout_to_json(layout):
    return json.dumps(
        [[e.fmap_size, e.scale, e.next_scale, list(e.ratios)] for e in layout]
    )


def layout_from_json(text):
    return tuple(
        LayoutEntry(int(f), float(s), float(sn), tuple(float(r) for r in ratios))
        for f, s, sn, ratios in json.loads(text)
    )

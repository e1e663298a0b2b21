"""Box geometry: IoU, anchor matching, offset encoding, and NMS.

All ties break toward the lower index so results are reproducible and can
be checked against literal-rule reference implementations.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import DatasetError, NumericError, ShapeError

BACKGROUND = 6  # class index reserved for unmatched anchors
DEFAULT_VARIANCES = (0.1, 0.2)


@dataclass(frozen=True)
class Detection:
    class_id: int
    score: float
    box: Tuple[float, float, float, float]  # corner-form, normalized


@dataclass(frozen=True)
class MatchResult:
    matched_gt: np.ndarray      # [A] int, -1 for background
    target_class: np.ndarray    # [A] int, BACKGROUND for unmatched
    target_offsets: np.ndarray  # [A, 4] float64, zeros for unmatched

    @property
    def positive_mask(self):
        return self.matched_gt >= 0


def center_to_corner(boxes):
    boxes = np.asarray(boxes, dtype=np.float64)
    cx, cy, w, h = boxes[..., 0], boxes[..., 1], boxes[..., 2], boxes[..., 3]
    return np.stack([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2], axis=-1)


def corner_to_center(boxes):
    boxes = np.asarray(boxes, dtype=np.float64)
    x0, y0, x1, y1 = boxes[..., 0], boxes[..., 1], boxes[..., 2], boxes[..., 3]
    return np.stack([(x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0], axis=-1)


def iou(box_a, box_b):
    """Intersection over union of two corner-form boxes; 0 for degenerate boxes."""
    ax0, ay0, ax1, ay1 = box_a
    bx0, by0, bx1, by1 = box_b
    area_a = max(0.0, ax1 - ax0) * max(0.0, ay1 - ay0)
    area_b = max(0.0, bx1 - bx0) * max(0.0, by1 - by0)
    if area_a == 0.0 or area_b == 0.0:
        return 0.0
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (area_a + area_b - inter)


def iou_matrix(boxes_a, boxes_b):
    """Pairwise IoU of corner-form box arrays, [A, B]."""
    boxes_a = np.asarray(boxes_a, dtype=np.float64)
    boxes_b = np.asarray(boxes_b, dtype=np.float64)
    tl = np.maximum(boxes_a[:, None, :2], boxes_b[None, :, :2])
    br = np.minimum(boxes_a[:, None, 2:], boxes_b[None, :, 2:])
    wh = np.clip(br - tl, 0.0, None)
    inter = wh[..., 0] * wh[..., 1]
    area_a = np.clip(boxes_a[:, 2] - boxes_a[:, 0], 0, None) * np.clip(
        boxes_a[:, 3] - boxes_a[:, 1], 0, None)
    area_b = np.clip(boxes_b[:, 2] - boxes_b[:, 0], 0, None) * np.clip(
        boxes_b[:, 3] - boxes_b[:, 1], 0, None)
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(union > 0.0, inter / union, 0.0)
    out[area_a == 0.0, :] = 0.0
    out[:, area_b == 0.0] = 0.0
    return out


def encode_box(gt_corner, anchor, variances=DEFAULT_VARIANCES):
    """Offsets of a corner-form ground truth relative to a center-form anchor."""
    g = corner_to_center(np.asarray(gt_corner, dtype=np.float64))
    a = np.asarray([anchor.cx, anchor.cy, anchor.w, anchor.h], dtype=np.float64) \
        if hasattr(anchor, "cx") else np.asarray(anchor, dtype=np.float64)
    if g[2] <= 0 or g[3] <= 0:
        raise DatasetError(f"non-positive ground-truth extent: {gt_corner}")
    vc, vs = variances
    return np.asarray([
        (g[0] - a[0]) / (a[2] * vc),
        (g[1] - a[1]) / (a[3] * vc),
        np.log(g[2] / a[2]) / vs,
        np.log(g[3] / a[3]) / vs,
    ])


def decode_box(offsets, anchor, variances=DEFAULT_VARIANCES, clamp=True):
    """Invert encode_box; corner-form output, clamped to [0, 1] by default."""
    offsets = np.asarray(offsets, dtype=np.float64)
    if not np.isfinite(offsets).all():
        raise NumericError("non-finite offsets")
    a = np.asarray([anchor.cx, anchor.cy, anchor.w, anchor.h], dtype=np.float64) \
        if hasattr(anchor, "cx") else np.asarray(anchor, dtype=np.float64)
    vc, vs = variances
    cx = offsets[0] * a[2] * vc + a[0]
    cy = offsets[1] * a[3] * vc + a[1]
    w = a[2] * np.exp(offsets[2] * vs)
    h = a[3] * np.exp(offsets[3] * vs)
    corner = np.asarray([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2])
    if clamp:
        corner = np.clip(corner, 0.0, 1.0)
    return corner


def decode_boxes(offsets, anchors_center, variances=DEFAULT_VARIANCES, clamp=True):
    """Vectorized decode over [A, 4] offsets against [A, 4] center-form anchors."""
    offsets = np.asarray(offsets, dtype=np.float64)
    a = np.asarray(anchors_center, dtype=np.float64)
    vc, vs = variances
    cx = offsets[:, 0] * a[:, 2] * vc + a[:, 0]
    cy = offsets[:, 1] * a[:, 3] * vc + a[:, 1]
    w = a[:, 2] * np.exp(offsets[:, 2] * vs)
    h = a[:, 3] * np.exp(offsets[:, 3] * vs)
    corners = np.stack([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2], axis=1)
    if clamp:
        corners = np.clip(corners, 0.0, 1.0)
    return corners


def match_anchors(anchor_set, gt, threshold=0.5, variances=DEFAULT_VARIANCES):
    """Assign anchors to ground-truth boxes.

    Rules: (i) each gt claims its best-IoU anchor regardless of threshold,
    gts processed in index order over anchors not yet claimed; (ii) every
    other anchor matches its best gt when IoU >= threshold, else background.
    All argmax ties break toward the lower index.
    """
    anchors_center = anchor_set.anchors if hasattr(anchor_set, "anchors") \
        else np.asarray(anchor_set, dtype=np.float64)
    num_anchors = anchors_center.shape[0]
    matched = np.full(num_anchors, -1, dtype=np.int64)
    target_class = np.full(num_anchors, BACKGROUND, dtype=np.int64)
    offsets = np.zeros((num_anchors, 4), dtype=np.float64)

    gt = list(gt)
    if gt:
        gt_boxes = np.asarray([g[1] for g in gt], dtype=np.float64)
        gt_classes = np.asarray([g[0] for g in gt], dtype=np.int64)
        anchors_corner = center_to_corner(anchors_center)
        overlaps = iou_matrix(anchors_corner, gt_boxes)

        claimed = np.zeros(num_anchors, dtype=bool)
        for g_idx in range(len(gt)):
            col = overlaps[:, g_idx].copy()
            col[claimed] = -1.0
            best_anchor = int(np.argmax(col))  # first max = lower index
            matched[best_anchor] = g_idx
            claimed[best_anchor] = True

        best_gt = np.argmax(overlaps, axis=1)
        best_iou = overlaps[np.arange(num_anchors), best_gt]
        take = (~claimed) & (best_iou >= threshold)
        matched[take] = best_gt[take]

        positive = matched >= 0
        target_class[positive] = gt_classes[matched[positive]]
        for a_idx in np.nonzero(positive)[0]:
            offsets[a_idx] = encode_box(
                gt_boxes[matched[a_idx]], anchors_center[a_idx], variances)

    return MatchResult(matched, target_class, offsets)


def nms(detections, iou_threshold=0.45, score_threshold=0.01, top_k=200):
    """Per-class greedy non-maximum suppression.

    Keeps the highest-scoring box per class (ties toward lower original
    index), suppresses same-class boxes with IoU strictly above the
    threshold, then keeps at most top_k detections overall by score.
    """
    indexed = [(i, d) for i, d in enumerate(detections) if d.score >= score_threshold]
    kept = []
    for class_id in sorted({d.class_id for _, d in indexed}):
        pool = [(i, d) for i, d in indexed if d.class_id == class_id]
        pool.sort(key=lambda item: (-item[1].score, item[0]))
        while pool:
            idx, best = pool.pop(0)
            kept.append((idx, best))
            pool = [(i, d) for i, d in pool if iou(best.box, d.box) <= iou_threshold]
    kept.sort(key=lambda item: (-item[1].score, item[0]))
    return [d for _, d in kept[:top_k]]

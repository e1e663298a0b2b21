"""Evaluation: per-class AP, mean AP, FPS timing, reconstruction accuracy."""

import json
import platform
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from skimage.metrics import structural_similarity

from .data import CLASS_DISPLAY_NAMES, CLASS_NAMES, NUM_CLASSES, ImageTensor
from .detector.boxes import iou
from .errors import VocabularyError


def average_precision(dets, gts, class_id, iou_threshold=0.5):
    """All-point interpolated AP for one class.

    ``dets``: list of (image_id, Detection); ``gts``: list of
    (image_id, class_id, box). Detections rank by score (ties toward the
    lower list index); each greedily matches the highest-IoU unmatched
    ground truth of its image at IoU >= threshold (ties toward the lower
    ground-truth index).
    """
    if not (0 <= class_id < NUM_CLASSES):
        raise VocabularyError(f"class id {class_id} outside 0..{NUM_CLASSES - 1}")

    class_gts = [(i, (img, box)) for i, (img, cid, box) in enumerate(gts) if cid == class_id]
    class_dets = [(i, img, d) for i, (img, d) in enumerate(dets) if d.class_id == class_id]
    num_gt = len(class_gts)
    if not class_dets:
        return 0.0 if num_gt else None
    if num_gt == 0:
        return 0.0

    class_dets.sort(key=lambda item: (-item[2].score, item[0]))
    matched = set()
    tp = np.zeros(len(class_dets))
    for rank, (_, img, det) in enumerate(class_dets):
        best_iou = 0.0
        best_gt = None
        for gt_idx, (gt_img, gt_box) in class_gts:
            if gt_img != img or gt_idx in matched:
                continue
            overlap = iou(det.box, gt_box)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou = overlap
                best_gt = gt_idx
        if best_gt is not None:
            matched.add(best_gt)
            tp[rank] = 1.0

    cum_tp = np.cumsum(tp)
    recall = cum_tp / num_gt
    precision = cum_tp / np.arange(1, len(class_dets) + 1)

    # precision envelope, then area under the stepwise PR curve
    for i in range(len(precision) - 2, -1, -1):
        precision[i] = max(precision[i], precision[i + 1])
    ap = 0.0
    prev_recall = 0.0
    for r, p in zip(recall, precision):
        if r > prev_recall:
            ap += (r - prev_recall) * p
            prev_recall = r
    return float(ap)


def mean_average_precision(dets, gts, iou_threshold=0.5):
    """Per-class AP plus the mean over classes present in gts or detections."""
    per_class = {}
    for class_id, name in enumerate(CLASS_NAMES):
        ap = average_precision(dets, gts, class_id, iou_threshold)
        if ap is not None:
            per_class[name] = ap
    mean_ap = float(np.mean(list(per_class.values()))) if per_class else 0.0
    return per_class, mean_ap


@dataclass
class FpsResult:
    fps: float
    runs: List[float]
    hardware: str
    note: str = "timed section ran exclusively; comparisons across hardware are not meaningful"


def fps_benchmark(pipeline_fn, images, warmup=1, repeats=3):
    """Median frames/second of ``pipeline_fn`` over the image list."""
    if not images:
        raise ValueError("need at least one image")
    if warmup < 1:
        raise ValueError("warmup must be >= 1")
    for _ in range(warmup):
        for image in images:
            pipeline_fn(image)
    runs = []
    for _ in range(repeats):
        start = time.perf_counter()
        for image in images:
            pipeline_fn(image)
        elapsed = time.perf_counter() - start
        runs.append(len(images) / elapsed)
    hardware = f"{platform.processor() or platform.machine()} / {platform.system()}"
    return FpsResult(float(np.median(runs)), runs, hardware)


def _luminance(tensor):
    arr = tensor.data if isinstance(tensor, ImageTensor) else np.asarray(tensor)
    rgb = (arr.astype(np.float64) + 1.0) / 2.0
    return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]


def image_similarity(a, b):
    """Structural similarity on luminance, 11x11 Gaussian window."""
    return float(structural_similarity(
        _luminance(a), _luminance(b),
        data_range=1.0, win_size=11, gaussian_weights=True, sigma=1.5,
        use_sample_covariance=False,
    ))


def reconstruction_accuracy(translated, references, tau=0.5):
    """Fraction of pairs with similarity >= tau, plus the mean similarity.

    This metric is artifact-defined: a paired structural-similarity
    threshold over corresponded frames.
    """
    if len(translated) != len(references):
        raise ValueError(
            f"length mismatch: {len(translated)} translated vs {len(references)} references"
        )
    if not (0.0 < tau < 1.0):
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    sims = [image_similarity(t, r) for t, r in zip(translated, references)]
    accuracy = 100.0 * sum(1 for s in sims if s >= tau) / len(sims)
    return accuracy, float(np.mean(sims))


@dataclass
class EvalReport:
    """Table-shaped evaluation record (per-class AP in percent)."""

    per_class_ap: Dict[str, float]
    mean_ap: float
    fps: Optional[float] = None
    fps_runs: List[float] = field(default_factory=list)
    hardware: str = ""
    reconstruction_accuracy: Optional[float] = None
    mean_similarity: Optional[float] = None
    config_digest: str = ""

    def to_json(self):
        return json.dumps(self.__dict__, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))

    def format_table(self):
        """Aligned text table: per-class AP columns, FPS, then the mean."""
        headers = list(CLASS_DISPLAY_NAMES) + ["FPS", "Average mAP (%)"]
        cells = []
        for name in CLASS_NAMES:
            ap = self.per_class_ap.get(name)
            cells.append(f"{ap:.1f}" if ap is not None else "-")
        cells.append(f"{self.fps:.1f}" if self.fps is not None else "-")
        cells.append(f"{self.mean_ap:.1f}")
        widths = [max(len(h), len(c)) for h, c in zip(headers, cells)]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
            "  ".join(c.ljust(w) for c, w in zip(cells, widths)),
        ]
        if self.reconstruction_accuracy is not None:
            lines.append("")
            lines.append("Reconstruction Accuracy")
            extra = ""
            if self.mean_similarity is not None:
                extra = f"  (mean similarity {self.mean_similarity:.3f})"
            lines.append(f"{self.reconstruction_accuracy:.1f}%{extra}")
        return "\n".join(lines)


def build_report(dets, gts, iou_threshold=0.5, fps_result=None,
                 reconstruction=None, config_digest=""):
    per_class, mean_ap = mean_average_precision(dets, gts, iou_threshold)
    report = EvalReport(
        per_class_ap={k: 100.0 * v for k, v in per_class.items()},
        mean_ap=100.0 * mean_ap,
        config_digest=config_digest,
    )
    if fps_result is not None:
        report.fps = fps_result.fps
        report.fps_runs = fps_result.runs
        report.hardware = fps_result.hardware
    if reconstruction is not None:
        report.reconstruction_accuracy, report.mean_similarity = reconstruction
    return report

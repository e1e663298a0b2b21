from .anchors import AnchorSet, LayoutEntry, generate_anchors, desk_layout, full_300_layout
from .boxes import (
    BACKGROUND,
    Detection,
    MatchResult,
    decode_box,
    encode_box,
    iou,
    iou_matrix,
    match_anchors,
    nms,
)
from .loss import multibox_loss
from .model import DetectorNet, NmsConfig, detect
from .train import (
    DetectorCheckpoint,
    DetectorTrainer,
    build_detector_checkpoint,
    load_detector_checkpoint,
    save_detector_checkpoint,
)

__all__ = [
    "AnchorSet",
    "LayoutEntry",
    "generate_anchors",
    "desk_layout",
    "full_300_layout",
    "BACKGROUND",
    "Detection",
    "MatchResult",
    "iou",
    "iou_matrix",
    "encode_box",
    "decode_box",
    "match_anchors",
    "nms",
    "multibox_loss",
    "DetectorNet",
    "NmsConfig",
    "detect",
    "DetectorCheckpoint",
    "DetectorTrainer",
    "build_detector_checkpoint",
    "save_detector_checkpoint",
    "load_detector_checkpoint",
]

"""Small convolutional detector with per-scale localization/confidence heads."""

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import CompatibilityError, ConfigError, ShapeError
from .boxes import Detection, decode_boxes
from .loss import NUM_CONF_CLASSES


@dataclass(frozen=True)
class NmsConfig:
    iou_threshold: float = 0.45
    score_threshold: float = 0.01
    top_k: int = 200


class DetectorNet(nn.Module):
    """Stride-2 conv backbone tapped at each layout feature-map size.

    Head channel order per cell is box-major: channel k*4+c is coordinate c
    of the cell's k-th prior, matching the anchor generator's ordering.
    """

    def __init__(self, layout, input_size, base_channels=16):
        super().__init__()
        self.layout = tuple(layout)
        self.input_size = input_size
        self.base_channels = base_channels

        required = [entry.fmap_size for entry in self.layout]
        if required != sorted(required, reverse=True):
            raise ConfigError("layout feature maps must be in decreasing size order")

        blocks = []
        tap_channels = {}
        size = input_size
        in_ch = 3
        out_ch = base_channels
        cap = base_channels * 4
        pending = list(required)
        while pending:
            if size == pending[0]:
                tap_channels[len(blocks)] = in_ch
                pending.pop(0)
                continue
            if size < pending[0]:
                raise ConfigError(
                    f"cannot reach feature map size {pending[0]} from input {input_size}"
                )
            if size == 3 and pending[0] == 1:
                blocks.append(nn.Sequential(nn.Conv2d(in_ch, out_ch, 3), nn.ReLU(inplace=True)))
                size = 1
            else:
                blocks.append(nn.Sequential(
                    nn.Conv2d(in_ch, out_ch, 3, stride=2, padding=1),
                    nn.ReLU(inplace=True),
                ))
                size = (size - 1) // 2 + 1
            in_ch = out_ch
            out_ch = min(out_ch * 2, cap)
        self.blocks = nn.ModuleList(blocks)
        self.tap_points = sorted(tap_channels)

        loc_heads, conf_heads = [], []
        for entry, tap in zip(self.layout, self.tap_points):
            k = entry.boxes_per_cell
            ch = tap_channels[tap]
            loc_heads.append(nn.Conv2d(ch, 4 * k, 3, padding=1))
            conf_heads.append(nn.Conv2d(ch, NUM_CONF_CLASSES * k, 3, padding=1))
        self.loc_heads = nn.ModuleList(loc_heads)
        self.conf_heads = nn.ModuleList(conf_heads)

    def forward(self, x):
        if x.shape[-1] != self.input_size or x.shape[-2] != self.input_size:
            raise ShapeError(
                f"expected {self.input_size}x{self.input_size} input, got {tuple(x.shape)}"
            )
        n = x.shape[0]
        conf_out, loc_out = [], []
        tap_iter = iter(zip(self.tap_points, self.loc_heads, self.conf_heads, self.layout))
        next_tap = next(tap_iter, None)
        feat = x
        for i in range(len(self.blocks) + 1):
            while next_tap is not None and next_tap[0] == i:
                _, loc_head, conf_head, entry = next_tap
                k = entry.boxes_per_cell
                loc = loc_head(feat).permute(0, 2, 3, 1).reshape(n, -1, 4)
                conf = conf_head(feat).permute(0, 2, 3, 1).reshape(n, -1, NUM_CONF_CLASSES)
                loc_out.append(loc)
                conf_out.append(conf)
                next_tap = next(tap_iter, None)
            if i < len(self.blocks):
                feat = self.blocks[i](feat)
        return torch.cat(conf_out, dim=1), torch.cat(loc_out, dim=1)


def detect(net, image, anchor_set, nms_config=NmsConfig()):
    """Forward pass, softmax, decode, per-class NMS on one image."""
    from .boxes import nms as run_nms

    expected = anchor_set.anchors.shape[0]
    x = torch.from_numpy(image.data).unsqueeze(0)
    net.eval()
    with torch.no_grad():
        conf_logits, loc_preds = net(x)
    net.train()
    if conf_logits.shape[1] != expected:
        raise CompatibilityError(
            f"network produced {conf_logits.shape[1]} anchors, layout expects {expected}"
        )
    probs = F.softmax(conf_logits[0], dim=1).numpy().astype(np.float64)
    boxes = decode_boxes(loc_preds[0].numpy().astype(np.float64), anchor_set.anchors)

    candidates = []
    for a_idx in range(expected):
        box = tuple(boxes[a_idx])
        for class_id in range(NUM_CONF_CLASSES - 1):
            score = float(probs[a_idx, class_id])
            if score >= nms_config.score_threshold:
                candidates.append(Detection(class_id, score, box))
    kept = run_nms(candidates, nms_config.iou_threshold,
                   nms_config.score_threshold, nms_config.top_k)
    return [d for d in kept if d.box[0] < d.box[2] and d.box[1] < d.box[3]]

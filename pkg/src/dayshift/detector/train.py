"""Detector training loop and checkpointing."""

import math
from dataclasses import dataclass

import numpy as np
import torch

from .. import checkpoint as ckpt_io
from ..errors import TrainingDivergenceError
from .anchors import generate_anchors, layout_from_json, layout_to_json
from .boxes import match_anchors
from .loss import multibox_loss
from .model import DetectorNet


@dataclass
class DetectorCheckpoint:
    net: DetectorNet
    step: int
    seed: int
    config_digest: str

    @property
    def layout(self):
        return self.net.layout


def build_detector_checkpoint(layout, input_size, seed, base_channels=16, config_digest=""):
    torch.manual_seed(seed)
    net = DetectorNet(layout, input_size, base_channels)
    return DetectorCheckpoint(net, step=0, seed=seed, config_digest=config_digest)


class DetectorTrainer:
    def __init__(self, ckpt, lr=1e-3, phi=1.0, match_threshold=0.5):
        self.ckpt = ckpt
        self.phi = phi
        self.match_threshold = match_threshold
        self.anchors = generate_anchors(ckpt.layout)
        self.opt = torch.optim.Adam(ckpt.net.parameters(), lr=lr)

    def train_step(self, batch):
        """One gradient step on a batch of (ImageTensor, gt boxes) pairs.

        gt boxes are (class_id, (x_min, y_min, x_max, y_max)) tuples.
        """
        images = torch.from_numpy(
            np.stack([img.data for img, _ in batch]).astype(np.float32))
        matches = [
            match_anchors(self.anchors, gt, self.match_threshold)
            for _, gt in batch
        ]
        conf_logits, loc_preds = self.ckpt.net(images)
        total = 0.0
        conf_part = 0.0
        loc_part = 0.0
        for i, match in enumerate(matches):
            loss, parts = multibox_loss(conf_logits[i], loc_preds[i], match, self.phi)
            total = total + loss
            conf_part = conf_part + parts["conf"]
            loc_part = loc_part + parts["loc"]
        total = total / len(batch)
        if not math.isfinite(float(total.detach())):
            raise TrainingDivergenceError(self.ckpt.step)
        self.opt.zero_grad(set_to_none=True)
        total.backward()
        self.opt.step()
        self.ckpt.step += 1
        return {
            "total": float(total.detach()),
            "conf": float(conf_part.detach()) / len(batch),
            "loc": float(loc_part.detach()) / len(batch),
        }


def save_detector_checkpoint(ckpt, path):
    metadata = {
        "step": str(ckpt.step),
        "seed": str(ckpt.seed),
        "config_digest": ckpt.config_digest,
        "layout": layout_to_json(ckpt.layout),
        "input_size": str(ckpt.net.input_size),
        "base_channels": str(ckpt.net.base_channels),
    }
    tensors = {
        name: param.detach().numpy()
        for name, param in ckpt.net.state_dict().items()
    }
    ckpt_io.write_archive(path, ckpt_io.DETECTOR_MAGIC, metadata, tensors)


def load_detector_checkpoint(path):
    metadata, tensors = ckpt_io.read_archive(path, ckpt_io.DETECTOR_MAGIC)
    net = DetectorNet(
        layout_from_json(metadata["layout"]),
        int(metadata["input_size"]),
        int(metadata["base_channels"]),
    )
    net.load_state_dict({
        name: torch.from_numpy(np.ascontiguousarray(arr))
        for name, arr in tensors.items()
    })
    return DetectorCheckpoint(
        net,
        step=int(metadata["step"]),
        seed=int(metadata["seed"]),
        config_digest=metadata["config_digest"],
    )

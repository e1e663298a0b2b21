"""Confidence + localization multibox loss with hard-negative mining."""

import torch
import torch.nn.functional as F

from ..errors import ShapeError

NUM_CONF_CLASSES = 7  # six object classes + background
HARD_NEGATIVE_RATIO = 3


def multibox_loss(conf_logits, loc_preds, match, phi=1.0):
    """(1/N) * (cross-entropy confidence + phi * smooth-L1 localization).

    The confidence term covers positives plus the hardest background
    anchors at a 3:1 negative:positive ratio (highest background loss
    first, ties toward lower index). Localization covers positives only.
    N is the positive count; with no positives the loss is defined as 0.
    """
    num_anchors = len(match.matched_gt)
    if conf_logits.shape != (num_anchors, NUM_CONF_CLASSES):
        raise ShapeError(
            f"conf_logits must be [{num_anchors}, {NUM_CONF_CLASSES}], got {tuple(conf_logits.shape)}"
        )
    if loc_preds.shape != (num_anchors, 4):
        raise ShapeError(
            f"loc_preds must be [{num_anchors}, 4], got {tuple(loc_preds.shape)}"
        )

    pos = torch.from_numpy(match.positive_mask.copy())
    num_pos = int(pos.sum())
    zero = conf_logits.sum() * 0 + loc_preds.sum() * 0
    if num_pos == 0:
        return zero, {"conf": zero.detach().clone(), "loc": zero.detach().clone()}

    targets = torch.from_numpy(match.target_class.copy())
    ce = F.cross_entropy(conf_logits, targets, reduction="none")

    neg_indices = torch.nonzero(~pos, as_tuple=False).flatten()
    num_neg = min(HARD_NEGATIVE_RATIO * num_pos, int(neg_indices.numel()))
    if num_neg > 0:
        neg_losses = ce[neg_indices].detach()
        order = torch.argsort(neg_losses, descending=True, stable=True)
        hard_neg = neg_indices[order[:num_neg]]
        conf_sum = ce[pos].sum() + ce[hard_neg].sum()
    else:
        conf_sum = ce[pos].sum()

    offsets = torch.from_numpy(match.target_offsets).to(loc_preds.dtype)
    loc_sum = F.smooth_l1_loss(loc_preds[pos], offsets[pos], reduction="sum")

    total = (conf_sum + phi * loc_sum) / num_pos
    parts = {"conf": conf_sum / num_pos, "loc": loc_sum / num_pos}
    return total, parts

"""Least-squares adversarial objective and cycle-consistency term."""

import torch

from ..errors import NumericError, ShapeError


def _require_finite(name, tensor):
    if not torch.isfinite(tensor).all():
        raise NumericError(f"non-finite values in {name}")


def adversarial_loss_discriminator(real_scores, fake_scores):
    """mean[(real - 1)^2] + mean[fake^2]; zero exactly at (real=1, fake=0)."""
    _require_finite("real_scores", real_scores)
    _require_finite("fake_scores", fake_scores)
    return ((real_scores - 1.0) ** 2).mean() + (fake_scores ** 2).mean()


def adversarial_loss_generator(fake_scores):
    """mean[(fake - 1)^2]; zero exactly at fake=1."""
    _require_finite("fake_scores", fake_scores)
    return ((fake_scores - 1.0) ** 2).mean()


def cycle_loss(a, a_cycled, b, b_cycled, lambda_cyc=10.0):
    """lambda * (mean|a - a_cycled| + mean|b - b_cycled|)."""
    if a.shape != a_cycled.shape or b.shape != b_cycled.shape:
        raise ShapeError("cycle_loss inputs must match shapes pairwise")
    return lambda_cyc * ((a - a_cycled).abs().mean() + (b - b_cycled).abs().mean())

"""Training loop and checkpointing for the translation stage."""

import math
from dataclasses import dataclass

import numpy as np
import torch

from .. import checkpoint as ckpt_io
from ..data import ImageTensor
from ..errors import CompatibilityError, TrainingDivergenceError
from .losses import (
    adversarial_loss_discriminator,
    adversarial_loss_generator,
    cycle_loss,
)
from .networks import Generator, PatchDiscriminator, build_translation_models

ADAM_BETAS = (0.5, 0.999)


@dataclass
class TranslationCheckpoint:
    g_ab: Generator
    g_ba: Generator
    d_a: PatchDiscriminator
    d_b: PatchDiscriminator
    step: int
    seed: int
    config_digest: str

    @property
    def n_blocks(self):
        return self.g_ab.n_blocks


def build_translation_checkpoint(n_blocks, seed, ngf=64, ndf=64, config_digest=""):
    g_ab, g_ba, d_a, d_b = build_translation_models(n_blocks, seed, ngf, ndf)
    return TranslationCheckpoint(g_ab, g_ba, d_a, d_b, step=0, seed=seed,
                                 config_digest=config_digest)


class TranslationTrainer:
    """One generator update plus one update per discriminator, per step."""

    def __init__(self, ckpt, lr=2e-4, lambda_cyc=10.0):
        self.ckpt = ckpt
        self.lambda_cyc = lambda_cyc
        gen_params = list(ckpt.g_ab.parameters()) + list(ckpt.g_ba.parameters())
        self.opt_g = torch.optim.Adam(gen_params, lr=lr, betas=ADAM_BETAS)
        self.opt_d_a = torch.optim.Adam(ckpt.d_a.parameters(), lr=lr, betas=ADAM_BETAS)
        self.opt_d_b = torch.optim.Adam(ckpt.d_b.parameters(), lr=lr, betas=ADAM_BETAS)

    def train_step(self, batch_a, batch_b):
        """Run one optimization step; returns the loss dict."""
        c = self.ckpt

        # Generator update: fool both discriminators, stay cycle-consistent.
        fake_b = c.g_ab(batch_a)
        fake_a = c.g_ba(batch_b)
        rec_a = c.g_ba(fake_b)
        rec_b = c.g_ab(fake_a)
        g_adv = (adversarial_loss_generator(c.d_b(fake_b))
                 + adversarial_loss_generator(c.d_a(fake_a)))
        cyc = cycle_loss(batch_a, rec_a, batch_b, rec_b, self.lambda_cyc)
        g_total = g_adv + cyc
        self.opt_g.zero_grad(set_to_none=True)
        g_total.backward()
        self.opt_g.step()

        # Discriminator updates on detached fakes.
        d_a_loss = adversarial_loss_discriminator(c.d_a(batch_a), c.d_a(fake_a.detach()))
        self.opt_d_a.zero_grad(set_to_none=True)
        d_a_loss.backward()
        self.opt_d_a.step()

        d_b_loss = adversarial_loss_discriminator(c.d_b(batch_b), c.d_b(fake_b.detach()))
        self.opt_d_b.zero_grad(set_to_none=True)
        d_b_loss.backward()
        self.opt_d_b.step()

        losses = {
            "d_a": float(d_a_loss.detach()),
            "d_b": float(d_b_loss.detach()),
            "g_adv": float(g_adv.detach()),
            "cycle": float(cyc.detach()),
        }
        if not all(math.isfinite(v) for v in losses.values()):
            raise TrainingDivergenceError(c.step)
        c.step += 1
        return losses


def translate(ckpt, night, expected_digest=None):
    """Apply G_ab to a preprocessed eval-mode night image."""
    if expected_digest is not None and ckpt.config_digest != expected_digest:
        raise CompatibilityError(
            f"checkpoint digest {ckpt.config_digest!r} != config digest {expected_digest!r}"
        )
    x = torch.from_numpy(night.data).unsqueeze(0)
    ckpt.g_ab.eval()
    with torch.no_grad():
        out = ckpt.g_ab(x).squeeze(0)
    ckpt.g_ab.train()
    return ImageTensor(out.numpy())


def _collect_tensors(ckpt):
    tensors = {}
    for prefix, model in (("g_ab", ckpt.g_ab), ("g_ba", ckpt.g_ba),
                          ("d_a", ckpt.d_a), ("d_b", ckpt.d_b)):
        for name, param in model.state_dict().items():
            tensors[f"{prefix}.{name}"] = param.detach().numpy()
    return tensors


def save_translation_checkpoint(ckpt, path):
    metadata = {
        "step": str(ckpt.step),
        "seed": str(ckpt.seed),
        "config_digest": ckpt.config_digest,
        "n_blocks": str(ckpt.g_ab.n_blocks),
        "ngf": str(ckpt.g_ab.ngf),
        "ndf": str(ckpt.d_a.ndf),
    }
    ckpt_io.write_archive(path, ckpt_io.TRANSLATION_MAGIC, metadata, _collect_tensors(ckpt))


def load_translation_checkpoint(path):
    metadata, tensors = ckpt_io.read_archive(path, ckpt_io.TRANSLATION_MAGIC)
    n_blocks = int(metadata["n_blocks"])
    ngf = int(metadata["ngf"])
    ndf = int(metadata["ndf"])
    ckpt = TranslationCheckpoint(
        g_ab=Generator(n_blocks, ngf),
        g_ba=Generator(n_blocks, ngf),
        d_a=PatchDiscriminator(ndf),
        d_b=PatchDiscriminator(ndf),
        step=int(metadata["step"]),
        seed=int(metadata["seed"]),
        config_digest=metadata["config_digest"],
    )
    for prefix, model in (("g_ab", ckpt.g_ab), ("g_ba", ckpt.g_ba),
                          ("d_a", ckpt.d_a), ("d_b", ckpt.d_b)):
        state = {
            name[len(prefix) + 1:]: torch.from_numpy(np.ascontiguousarray(arr))
            for name, arr in tensors.items()
            if name.startswith(prefix + ".")
        }
        model.load_state_dict(state)
    return ckpt

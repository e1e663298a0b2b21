import numpy as np
import pytest
import torch
import torch.nn as nn

from dayshift.data import ImageTensor
from dayshift.errors import CompatibilityError
from dayshift.translation.train import (
    TranslationTrainer,
    build_translation_checkpoint,
    load_translation_checkpoint,
    save_translation_checkpoint,
    translate,
)


def _random_batch(seed, n=1, size=64):
    g = torch.Generator().manual_seed(seed)
    return torch.rand(n, 3, size, size, generator=g) * 2 - 1


class _OracleDiscriminator(nn.Module):
    """Stub scoring 1 on the known real batch and 0 on anything else."""

    def __init__(self, real_batch):
        super().__init__()
        self.real_batch = real_batch
        self.dummy = nn.Parameter(torch.zeros(1))

    def forward(self, x):
        value = 1.0 if torch.equal(x, self.real_batch) else 0.0
        return torch.full((x.shape[0], 1, 6, 6), value) + self.dummy


def test_optimal_stub_discriminators_report_zero_d_losses():
    ckpt = build_translation_checkpoint(2, seed=0, ngf=8, ndf=8)
    batch_a = _random_batch(1)
    batch_b = _random_batch(2)
    ckpt.d_a = _OracleDiscriminator(batch_a)
    ckpt.d_b = _OracleDiscriminator(batch_b)
    trainer = TranslationTrainer(ckpt)
    losses = trainer.train_step(batch_a, batch_b)
    assert losses["d_a"] == 0.0
    assert losses["d_b"] == 0.0


def test_two_fresh_runs_are_bit_identical():
    histories = []
    for _ in range(2):
        torch.manual_seed(99)
        ckpt = build_translation_checkpoint(2, seed=5, ngf=8, ndf=8)
        trainer = TranslationTrainer(ckpt, lr=1e-3)
        history = []
        for step in range(3):
            batch_a = _random_batch(100 + step)
            batch_b = _random_batch(200 + step)
            history.append(trainer.train_step(batch_a, batch_b))
        histories.append(history)
    assert histories[0] == histories[1]


def test_step_counter_increments():
    ckpt = build_translation_checkpoint(1, seed=0, ngf=8, ndf=8)
    trainer = TranslationTrainer(ckpt)
    trainer.train_step(_random_batch(0), _random_batch(1))
    assert ckpt.step == 1


def test_translate_contract():
    ckpt = build_translation_checkpoint(2, seed=0, ngf=8, ndf=8)
    night = ImageTensor((np.random.default_rng(0).random((3, 64, 64)) * 2 - 1)
                        .astype(np.float32))
    out1 = translate(ckpt, night)
    out2 = translate(ckpt, night)
    assert isinstance(out1, ImageTensor)
    assert out1.data.shape == (3, 64, 64)
    assert np.array_equal(out1.data, out2.data)


def test_translate_digest_mismatch():
    ckpt = build_translation_checkpoint(1, seed=0, ngf=8, ndf=8, config_digest="aaa")
    night = ImageTensor(np.zeros((3, 64, 64), dtype=np.float32))
    with pytest.raises(CompatibilityError):
        translate(ckpt, night, expected_digest="bbb")


def test_save_load_round_trip(tmp_path):
    ckpt = build_translation_checkpoint(2, seed=3, ngf=8, ndf=8, config_digest="d1")
    ckpt.step = 42
    path = tmp_path / "t.ckpt"
    save_translation_checkpoint(ckpt, path)
    loaded = load_translation_checkpoint(path)
    assert loaded.step == 42
    assert loaded.seed == 3
    assert loaded.config_digest == "d1"
    assert loaded.n_blocks == 2
    for m_orig, m_load in ((ckpt.g_ab, loaded.g_ab), (ckpt.g_ba, loaded.g_ba),
                           (ckpt.d_a, loaded.d_a), (ckpt.d_b, loaded.d_b)):
        orig = m_orig.state_dict()
        back = m_load.state_dict()
        assert set(orig) == set(back)
        for name in orig:
            assert torch.equal(orig[name], back[name]), name

import numpy as np
import pytest
import torch

from dayshift.detector.boxes import BACKGROUND, MatchResult
from dayshift.detector.loss import multibox_loss
from dayshift.errors import ShapeError

from oracles import central_difference_grad, max_relative_error, multibox_loss_literal


def _random_match(rng, n_anchors, n_pos):
    matched = np.full(n_anchors, -1, dtype=np.int64)
    target_class = np.full(n_anchors, BACKGROUND, dtype=np.int64)
    pos = rng.choice(n_anchors, size=n_pos, replace=False)
    for i, a in enumerate(pos):
        matched[a] = i
        target_class[a] = int(rng.integers(0, 6))
    offsets = np.zeros((n_anchors, 4))
    offsets[matched >= 0] = rng.standard_normal((n_pos, 4))
    return MatchResult(matched, target_class, offsets)


def _selection_gap(conf, match, n_pos):
    """Margin around the hard-negative cutoff (background CE losses)."""
    logits = torch.tensor(conf)
    ce = torch.nn.functional.cross_entropy(
        logits, torch.tensor(match.target_class), reduction="none")
    neg = sorted((float(ce[i]) for i in range(len(ce)) if match.matched_gt[i] < 0),
                 reverse=True)
    k = 3 * n_pos
    if k >= len(neg) or not neg:
        return 1.0
    return neg[k - 1] - neg[k]


class TestMultiboxLossValues:
    def test_near_perfect_predictions(self):
        rng = np.random.default_rng(0)
        match = _random_match(rng, 20, 3)
        conf = np.full((20, 7), -20.0)
        conf[np.arange(20), match.target_class] = 20.0
        loc = match.target_offsets.copy()
        loss, parts = multibox_loss(torch.tensor(conf), torch.tensor(loc), match)
        assert float(loss) < 1e-3

    def test_no_positives_is_zero(self):
        match = MatchResult(np.full(10, -1), np.full(10, BACKGROUND), np.zeros((10, 4)))
        loss, parts = multibox_loss(torch.zeros(10, 7), torch.zeros(10, 4), match)
        assert float(loss) == 0.0
        assert float(parts["conf"]) == 0.0 and float(parts["loc"]) == 0.0

    def test_all_background_has_zero_loc_part(self):
        # positives exist in another image of the batch; here none
        match = MatchResult(np.full(5, -1), np.full(5, BACKGROUND), np.zeros((5, 4)))
        _, parts = multibox_loss(torch.randn(5, 7), torch.randn(5, 4), match)
        assert float(parts["loc"]) == 0.0

    def test_shape_mismatch(self):
        match = MatchResult(np.full(5, -1), np.full(5, BACKGROUND), np.zeros((5, 4)))
        with pytest.raises(ShapeError):
            multibox_loss(torch.zeros(6, 7), torch.zeros(5, 4), match)
        with pytest.raises(ShapeError):
            multibox_loss(torch.zeros(5, 7), torch.zeros(5, 3), match)

    def test_value_matches_literal_oracle(self):
        rng = np.random.default_rng(1)
        for trial in range(100):
            n_anchors = int(rng.integers(8, 30))
            n_pos = int(rng.integers(1, min(5, n_anchors)))
            match = _random_match(rng, n_anchors, n_pos)
            conf = rng.standard_normal((n_anchors, 7))
            loc = rng.standard_normal((n_anchors, 4))
            phi = float(rng.uniform(0.5, 2.0))
            loss, parts = multibox_loss(
                torch.tensor(conf), torch.tensor(loc), match, phi)
            expected, conf_part, loc_part = multibox_loss_literal(
                conf, loc, match.matched_gt, match.target_class,
                match.target_offsets, phi)
            assert float(loss) == pytest.approx(expected, abs=1e-9), f"trial {trial}"
            assert float(parts["conf"]) == pytest.approx(conf_part, abs=1e-9)
            assert float(parts["loc"]) == pytest.approx(loc_part, abs=1e-9)


class TestMultiboxLossGradient:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        checked = 0
        while checked < 20:
            n_anchors = 20
            n_pos = int(rng.integers(1, 5))
            match = _random_match(rng, n_anchors, n_pos)
            conf = rng.standard_normal((n_anchors, 7))
            loc = rng.standard_normal((n_anchors, 4))
            # resample when the hard-negative cutoff or a smooth-L1 kink is
            # within finite-difference reach
            if _selection_gap(conf, match, n_pos) < 1e-2:
                continue
            kink = np.min(np.abs(np.abs(loc[match.matched_gt >= 0]
                                        - match.target_offsets[match.matched_gt >= 0]) - 1.0))
            if kink < 1e-2:
                continue
            checked += 1

            conf_t = torch.tensor(conf, requires_grad=True)
            loc_t = torch.tensor(loc, requires_grad=True)
            loss, _ = multibox_loss(conf_t, loc_t, match, phi=1.3)
            loss.backward()
            analytic = [conf_t.grad.numpy(), loc_t.grad.numpy()]

            def evaluate(arrays):
                with torch.no_grad():
                    value, _ = multibox_loss(
                        torch.tensor(arrays[0]), torch.tensor(arrays[1]),
                        match, phi=1.3)
                return float(value)

            numeric = central_difference_grad(evaluate, [conf.copy(), loc.copy()])
            assert max_relative_error(analytic, numeric) < 1e-3

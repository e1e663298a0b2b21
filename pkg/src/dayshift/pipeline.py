"""End-to-end orchestration: training runs, inference, and evaluation."""

import os

import numpy as np
import torch
from PIL import Image

from . import config as config_mod
from .data import (
    CLASS_NAMES,
    decode_image,
    denormalize,
    load_detection_dataset,
    load_unpaired_dataset,
    preprocess,
    preprocess_annotated,
)
from .detector import (
    DetectorTrainer,
    NmsConfig,
    build_detector_checkpoint,
    detect,
    generate_anchors,
    load_detector_checkpoint,
    save_detector_checkpoint,
)
from .errors import CompatibilityError
from .metrics import build_report, fps_benchmark, reconstruction_accuracy
from .render import render_overlay
from .translation.train import (
    TranslationTrainer,
    build_translation_checkpoint,
    load_translation_checkpoint,
    save_translation_checkpoint,
    translate,
)

TRANSLATION_CKPT = "translation.ckpt"
DETECTOR_CKPT = "detector.ckpt"


def _load_batch(paths, indices, mode, crop, load, seeds):
    tensors = []
    for idx, seed in zip(indices, seeds):
        raw = decode_image(paths[idx])
        t = preprocess(raw, mode, "translation", seed=int(seed),
                       translation_load_size=load, translation_crop_size=crop)
        tensors.append(torch.from_numpy(t.data))
    return torch.stack(tensors)


def train_translate(cfg, out_dir, steps=None, seed=None, log_fn=None):
    """Train the translation stage; writes translation.ckpt into out_dir."""
    tc = cfg.translation
    steps = tc.steps if steps is None else steps
    seed = tc.seed if seed is None else seed
    os.makedirs(out_dir, exist_ok=True)

    dataset = load_unpaired_dataset(cfg.paths.night_dir, cfg.paths.day_dir,
                                    cfg.paths.correspondence_file)
    torch.manual_seed(seed)
    ckpt = build_translation_checkpoint(
        tc.n_blocks, seed, tc.ngf, tc.ndf, config_digest=config_mod.digest(cfg))
    trainer = TranslationTrainer(ckpt, lr=tc.lr, lambda_cyc=tc.lambda_cyc)

    rng = np.random.default_rng(seed)
    history = []
    for step in range(steps):
        idx_a = rng.integers(0, len(dataset.domain_a_paths), size=tc.batch_size)
        idx_b = rng.integers(0, len(dataset.domain_b_paths), size=tc.batch_size)
        seeds_a = rng.integers(0, 2 ** 31, size=tc.batch_size)
        seeds_b = rng.integers(0, 2 ** 31, size=tc.batch_size)
        batch_a = _load_batch(dataset.domain_a_paths, idx_a, "train",
                              tc.crop_size, tc.load_size, seeds_a)
        batch_b = _load_batch(dataset.domain_b_paths, idx_b, "train",
                              tc.crop_size, tc.load_size, seeds_b)
        losses = trainer.train_step(batch_a, batch_b)
        history.append(losses)
        if log_fn and (step % 25 == 0 or step == steps - 1):
            log_fn(f"step {step}: " + " ".join(f"{k}={v:.4f}" for k, v in losses.items()))
    path = os.path.join(out_dir, TRANSLATION_CKPT)
    save_translation_checkpoint(ckpt, path)
    return ckpt, history


def _detection_batch(cfg, samples, seed):
    batch = []
    for i, sample in enumerate(samples):
        raw = decode_image(sample.image_path)
        tensor, boxes = preprocess_annotated(
            raw, sample.boxes, "train", seed=seed + i,
            detection_size=cfg.detector.input_size)
        gt = [(c, (x0, y0, x1, y1)) for c, x0, y0, x1, y1 in boxes]
        batch.append((tensor, gt))
    return batch


def train_detect(cfg, out_dir, steps=None, seed=None, log_fn=None):
    """Train the detection stage; writes detector.ckpt into out_dir."""
    dc = cfg.detector
    steps = dc.steps if steps is None else steps
    seed = dc.seed if seed is None else seed
    os.makedirs(out_dir, exist_ok=True)

    samples = load_detection_dataset(cfg.paths.manifest)
    ckpt = build_detector_checkpoint(
        dc.build_layout(), dc.input_size, seed, dc.base_channels,
        config_digest=config_mod.digest(cfg))
    trainer = DetectorTrainer(ckpt, lr=dc.lr, phi=dc.phi,
                              match_threshold=dc.match_threshold)
    batch = _detection_batch(cfg, samples, seed)
    history = []
    for step in range(steps):
        losses = trainer.train_step(batch)
        history.append(losses)
        if log_fn and (step % 50 == 0 or step == steps - 1):
            log_fn(f"step {step}: " + " ".join(f"{k}={v:.4f}" for k, v in losses.items()))
    path = os.path.join(out_dir, DETECTOR_CKPT)
    save_detector_checkpoint(ckpt, path)
    return ckpt, history


def _check_digest(ckpt, cfg, stage):
    expected = config_mod.digest(cfg)
    if ckpt.config_digest and ckpt.config_digest != expected:
        raise CompatibilityError(
            f"{stage} checkpoint digest {ckpt.config_digest} != config digest {expected}"
        )


def run_inference(translation_ckpt, detector_ckpt, night_image_path, cfg):
    """night image -> translated day image -> detections on the day image."""
    _check_digest(translation_ckpt, cfg, "translation")
    _check_digest(detector_ckpt, cfg, "detector")
    raw = decode_image(night_image_path)
    night = preprocess(raw, "eval", "translation",
                       translation_crop_size=cfg.translation.crop_size)
    day = translate(translation_ckpt, night)
    day_raw = denormalize(day)
    det_input = preprocess(day_raw, "eval", "detection",
                           detection_size=cfg.detector.input_size)
    anchors = generate_anchors(detector_ckpt.layout)
    nms_cfg = NmsConfig(cfg.detector.nms_iou, cfg.detector.score_threshold,
                        cfg.detector.top_k)
    detections = detect(detector_ckpt.net, det_input, anchors, nms_cfg)
    return day_raw, detections


def write_inference_outputs(out_dir, stem, day_raw, detections, cfg):
    os.makedirs(out_dir, exist_ok=True)
    day_path = os.path.join(out_dir, f"{stem}_day.png")
    Image.fromarray(day_raw).save(day_path)
    visible = [d for d in detections
               if d.score >= cfg.detector.overlay_score_threshold]
    overlay = render_overlay(day_raw, visible, CLASS_NAMES)
    overlay_path = os.path.join(out_dir, f"{stem}_overlay.png")
    Image.fromarray(overlay).save(overlay_path)
    det_path = os.path.join(out_dir, f"{stem}_detections.txt")
    with open(det_path, "w") as fh:
        for d in detections:
            box = " ".join(f"{v:.6f}" for v in d.box)
            fh.write(f"{stem} {CLASS_NAMES[d.class_id]} {d.score:.6f} {box}\n")
    return day_path, overlay_path, det_path


def evaluate(cfg, out_dir, with_fps=True, with_reconstruction=True):
    """Detection mAP on the manifest set, plus FPS and reconstruction accuracy."""
    detector_ckpt = load_detector_checkpoint(os.path.join(out_dir, DETECTOR_CKPT))
    _check_digest(detector_ckpt, cfg, "detector")
    anchors = generate_anchors(detector_ckpt.layout)
    nms_cfg = NmsConfig(cfg.detector.nms_iou, cfg.detector.score_threshold,
                        cfg.detector.top_k)
    samples = load_detection_dataset(cfg.paths.manifest)

    dets, gts = [], []
    eval_images = []
    for image_id, sample in enumerate(samples):
        raw = decode_image(sample.image_path)
        tensor = preprocess(raw, "eval", "detection",
                            detection_size=cfg.detector.input_size)
        eval_images.append(tensor)
        for det in detect(detector_ckpt.net, tensor, anchors, nms_cfg):
            dets.append((image_id, det))
        for c, x0, y0, x1, y1 in sample.boxes:
            gts.append((image_id, c, (x0, y0, x1, y1)))

    fps_result = None
    if with_fps:
        fps_result = fps_benchmark(
            lambda img: detect(detector_ckpt.net, img, anchors, nms_cfg),
            eval_images, warmup=1, repeats=3)

    reconstruction = None
    if with_reconstruction and cfg.paths.correspondence_file:
        translation_ckpt = load_translation_checkpoint(
            os.path.join(out_dir, TRANSLATION_CKPT))
        _check_digest(translation_ckpt, cfg, "translation")
        dataset = load_unpaired_dataset(cfg.paths.night_dir, cfg.paths.day_dir,
                                        cfg.paths.correspondence_file)
        translated, references = [], []
        for night_idx, day_idx in dataset.correspondences or ():
            night = preprocess(decode_image(dataset.domain_a_paths[night_idx]),
                               "eval", "translation",
                               translation_crop_size=cfg.translation.crop_size)
            day = preprocess(decode_image(dataset.domain_b_paths[day_idx]),
                             "eval", "translation",
                             translation_crop_size=cfg.translation.crop_size)
            translated.append(translate(translation_ckpt, night))
            references.append(day)
        reconstruction = reconstruction_accuracy(translated, references,
                                                 tau=cfg.metrics.tau)

    return build_report(dets, gts, cfg.metrics.iou_threshold, fps_result,
                        reconstruction, config_digest=config_mod.digest(cfg))

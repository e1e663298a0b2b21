import os

import pytest
import yaml

from dayshift import config as config_mod
from dayshift import pipeline, toydata

TOY_CONFIG = {
    "translation": {
        "n_blocks": 2, "ngf": 16, "ndf": 16, "lambda_cyc": 10.0,
        "lr": 0.001, "batch_size": 2, "steps": 300, "seed": 7,
        "load_size": 72, "crop_size": 64,
    },
    "detector": {
        "layout": "desk", "input_size": 128, "base_channels": 16,
        "phi": 1.0, "lr": 0.001, "steps": 500, "seed": 7,
    },
    "metrics": {"iou_threshold": 0.5, "tau": 0.5},
}


def write_toy_workspace(root, translation_images=16, detection_images=8, seed=0):
    """Generate toy datasets under root and write a config pointing at them."""
    night_dir, day_dir, corr = toydata.make_translation_toyset(
        os.path.join(root, "toydata"), n=translation_images, size=64, seed=seed)
    manifest = toydata.make_detection_toyset(
        os.path.join(root, "toydata"), n=detection_images, size=128, seed=seed)
    doc = {k: dict(v) for k, v in TOY_CONFIG.items()}
    doc["paths"] = {
        "night_dir": night_dir,
        "day_dir": day_dir,
        "correspondence_file": corr,
        "manifest": manifest,
        "output_dir": os.path.join(root, "out"),
    }
    config_path = os.path.join(root, "config.yaml")
    with open(config_path, "w") as fh:
        yaml.safe_dump(doc, fh)
    return config_path


@pytest.fixture(scope="session")
def toy_workspace(tmp_path_factory):
    root = str(tmp_path_factory.mktemp("toyws"))
    config_path = write_toy_workspace(root)
    cfg = config_mod.load_config(config_path)
    return {"root": root, "config_path": config_path, "cfg": cfg}


@pytest.fixture(scope="session")
def trained_workspace(toy_workspace):
    """Full desk-scale training of both stages (used by the acceptance suite)."""
    cfg = toy_workspace["cfg"]
    out_dir = cfg.paths.output_dir
    _, translation_history = pipeline.train_translate(cfg, out_dir)
    _, detector_history = pipeline.train_detect(cfg, out_dir)
    return {
        **toy_workspace,
        "out_dir": out_dir,
        "translation_history": translation_history,
        "detector_history": detector_history,
    }

import glob
import os

import pytest

from dayshift.cli import main
from conftest import write_toy_workspace


@pytest.fixture(scope="module")
def quick_workspace(tmp_path_factory):
    """Tiny toy workspace; trainings here run only a couple of steps."""
    root = str(tmp_path_factory.mktemp("cliws"))
    config_path = write_toy_workspace(root, translation_images=4, detection_images=2)
    out_dir = os.path.join(root, "out")
    assert main(["train-translate", "--config", config_path, "--steps", "2"]) == 0
    assert main(["train-detect", "--config", config_path, "--steps", "2"]) == 0
    return {"root": root, "config_path": config_path, "out_dir": out_dir}


def test_unknown_subcommand_exits_2(capsys):
    assert main(["frobnicate"]) == 2


def test_unknown_flag_exits_2():
    assert main(["train-translate", "--config", "x", "--bogus"]) == 2


def test_missing_config_exits_1(tmp_path):
    assert main(["train-translate", "--config", str(tmp_path / "nope.yaml")]) == 1


def test_invalid_config_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("translation:\n  n_block: 2\n")
    assert main(["train-translate", "--config", str(bad)]) == 1
    assert "n_block" in capsys.readouterr().err


def test_train_commands_write_checkpoints(quick_workspace):
    out = quick_workspace["out_dir"]
    assert os.path.isfile(os.path.join(out, "translation.ckpt"))
    assert os.path.isfile(os.path.join(out, "detector.ckpt"))


def test_infer_writes_artifacts(quick_workspace):
    night = sorted(glob.glob(os.path.join(quick_workspace["root"],
                                          "toydata", "night", "*.png")))[0]
    assert main(["infer", "--config", quick_workspace["config_path"],
                 "--image", night]) == 0
    out = quick_workspace["out_dir"]
    stem = os.path.splitext(os.path.basename(night))[0]
    for suffix in ("_day.png", "_overlay.png", "_detections.txt"):
        assert os.path.isfile(os.path.join(out, stem + suffix))


def test_infer_is_byte_identical(quick_workspace, tmp_path):
    night = sorted(glob.glob(os.path.join(quick_workspace["root"],
                                          "toydata", "night", "*.png")))[0]
    cfg = quick_workspace["config_path"]
    outputs = []
    for run_dir in ("runA", "runB"):
        out = str(tmp_path / run_dir)
        # reuse existing checkpoints by copying the out dir
        import shutil
        shutil.copytree(quick_workspace["out_dir"], out)
        assert main(["infer", "--config", cfg, "--image", night, "--out", out]) == 0
        stem = os.path.splitext(os.path.basename(night))[0]
        outputs.append({
            suffix: open(os.path.join(out, stem + suffix), "rb").read()
            for suffix in ("_day.png", "_overlay.png", "_detections.txt")
        })
    assert outputs[0] == outputs[1]


def test_eval_then_report(quick_workspace, capsys):
    cfg = quick_workspace["config_path"]
    assert main(["eval", "--config", cfg]) == 0
    assert os.path.isfile(os.path.join(quick_workspace["out_dir"], "report.json"))
    assert main(["report", "--config", cfg]) == 0
    table = capsys.readouterr().out
    for column in ("bike", "bus", "car", "people", "sign", "traffic sign",
                   "FPS", "Average mAP (%)"):
        assert column in table


def test_report_without_eval_exits_1(tmp_path):
    config_path = write_toy_workspace(str(tmp_path))
    assert main(["report", "--config", config_path]) == 1


def test_make_toy(tmp_path):
    out = str(tmp_path / "toys")
    assert main(["make-toy", "--out", out, "--translation-images", "2",
                 "--detection-images", "2"]) == 0
    assert os.path.isdir(os.path.join(out, "night"))
    assert os.path.isfile(os.path.join(out, "manifest.tsv"))

"""Command-line surface: train-translate, train-detect, infer, eval, report."""

import argparse
import os
import sys

from . import config as config_mod
from . import pipeline, toydata
from .errors import DayshiftError
from .metrics import EvalReport

REPORT_FILE = "report.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(2)


def build_parser():
    parser = _Parser(prog="dayshift")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="path to the YAML config")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--seed", type=int, help="seed override")
        p.add_argument("--steps", type=int, help="step count override")

    add_common(sub.add_parser("train-translate", help="train the night-to-day stage"))
    add_common(sub.add_parser("train-detect", help="train the detection stage"))

    infer = sub.add_parser("infer", help="night image -> day image -> detections")
    add_common(infer)
    infer.add_argument("--image", required=True, help="night image path")

    evaluate = sub.add_parser("eval", help="write an evaluation report")
    add_common(evaluate)
    evaluate.add_argument("--no-fps", action="store_true")
    evaluate.add_argument("--no-reconstruction", action="store_true")

    report = sub.add_parser("report", help="render a report as a text table")
    add_common(report)

    maketoy = sub.add_parser("make-toy", help="generate the synthetic desk-scale datasets")
    maketoy.add_argument("--out", required=True)
    maketoy.add_argument("--seed", type=int, default=0)
    maketoy.add_argument("--translation-images", type=int, default=16)
    maketoy.add_argument("--detection-images", type=int, default=8)
    maketoy.add_argument("--image-size", type=int, default=64)
    maketoy.add_argument("--detection-size", type=int, default=128)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return _dispatch(args)
    except DayshiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args):
    if args.command == "make-toy":
        toydata.make_translation_toyset(
            args.out, n=args.translation_images, size=args.image_size, seed=args.seed)
        toydata.make_detection_toyset(
            args.out, n=args.detection_images, size=args.detection_size, seed=args.seed)
        print(f"toy datasets written under {args.out}")
        return 0

    cfg = config_mod.load_config(args.config)
    out_dir = args.out or cfg.paths.output_dir

    if args.command == "train-translate":
        _, history = pipeline.train_translate(cfg, out_dir, steps=args.steps,
                                              seed=args.seed, log_fn=print)
        print(f"translation checkpoint written to {out_dir}; "
              f"final cycle loss {history[-1]['cycle']:.4f}" if history
              else f"translation checkpoint written to {out_dir}")
        return 0

    if args.command == "train-detect":
        _, history = pipeline.train_detect(cfg, out_dir, steps=args.steps,
                                           seed=args.seed, log_fn=print)
        if history:
            print(f"detector checkpoint written to {out_dir}; "
                  f"final loss {history[-1]['total']:.4f}")
        return 0

    if args.command == "infer":
        from .pipeline import load_detector_checkpoint, load_translation_checkpoint

        translation_ckpt = load_translation_checkpoint(
            os.path.join(out_dir, pipeline.TRANSLATION_CKPT))
        detector_ckpt = load_detector_checkpoint(
            os.path.join(out_dir, pipeline.DETECTOR_CKPT))
        day_raw, detections = pipeline.run_inference(
            translation_ckpt, detector_ckpt, args.image, cfg)
        stem = os.path.splitext(os.path.basename(args.image))[0]
        paths = pipeline.write_inference_outputs(out_dir, stem, day_raw,
                                                 detections, cfg)
        print("wrote " + ", ".join(paths))
        return 0

    if args.command == "eval":
        report = pipeline.evaluate(cfg, out_dir, with_fps=not args.no_fps,
                                   with_reconstruction=not args.no_reconstruction)
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, REPORT_FILE)
        with open(path, "w") as fh:
            fh.write(report.to_json())
        print(f"report written to {path} (mean mAP {report.mean_ap:.1f}%)")
        return 0

    if args.command == "report":
        path = os.path.join(out_dir, REPORT_FILE)
        if not os.path.isfile(path):
            print(f"error: no report at {path}; run eval first", file=sys.stderr)
            return 1
        with open(path) as fh:
            report = EvalReport.from_json(fh.read())
        print(report.format_table())
        return 0

    return 2


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()

#!/usr/bin/env python3
"""Run the whole pipeline on the synthetic toy datasets.

Generates the data, trains both stages, runs inference on one night
image, evaluates, and prints the report table. Everything lands under
the directory given by --workdir (default: ./toyrun).
"""

import argparse
import glob
import os
import sys

from dayshift.cli import main as cli_main


def run(argv):
    code = cli_main(argv)
    if code != 0:
        print(f"command {argv} failed with exit code {code}", file=sys.stderr)
        raise SystemExit(code)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--workdir", default="toyrun")
    parser.add_argument("--config", default=os.path.join(
        os.path.dirname(__file__), "..", "configs", "toy.yaml"))
    args = parser.parse_args()
    args.config = os.path.abspath(args.config)

    os.makedirs(args.workdir, exist_ok=True)
    os.chdir(args.workdir)

    run(["make-toy", "--out", "toydata"])
    run(["train-translate", "--config", args.config])
    run(["train-detect", "--config", args.config])
    night = sorted(glob.glob("toydata/night/*.png"))[0]
    run(["infer", "--config", args.config, "--image", night])
    run(["eval", "--config", args.config])
    run(["report", "--config", args.config])


if __name__ == "__main__":
    main()

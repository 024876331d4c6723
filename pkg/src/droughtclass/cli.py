"""Command-line entry point.

    droughtclass run-all --config run.json --out-dir out/
    droughtclass ingest data/*.csv --out-dir out/
    droughtclass cluster --out-dir out/
    droughtclass classify --out-dir out/
    droughtclass analyze --out-dir out/
    droughtclass synth --out-dir out/ [--preset full]

Exit codes: 0 success, 2 configuration error, 3 input error, 4 numerical
failure.  The default output directory comes from ``DROUGHTCLASS_OUT_DIR``
(falling back to ``./drought_out``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

import numpy as np

from . import config as config_mod
from . import pipeline
from .errors import ConfigError, DroughtError, NumericalError

OUT_DIR_ENV = "DROUGHTCLASS_OUT_DIR"
DEFAULT_OUT_DIR = "drought_out"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out-dir", help=f"output directory (default: ${OUT_DIR_ENV} or ./{DEFAULT_OUT_DIR})")
    common.add_argument("--strict", action="store_true", default=None,
                        help="fail on out-of-window years or out-of-box locations instead of warning")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="droughtclass", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="parse and merge district CSV files")
    p.add_argument("inputs", nargs="*", help="district CSV files (default: data.inputs from the config)")

    p = sub.add_parser("cluster", parents=[common], help="elbow sweep, K-means and BGM, silhouettes")
    p.add_argument("--dataset", help="cleaned dataset CSV (default: <out-dir>/dataset.csv)")

    for name, text in (("classify", "train and evaluate the four classifiers"),
                       ("analyze", "cluster profiles, severity labels and densities")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--dataset", help="cleaned dataset CSV (default: <out-dir>/dataset.csv)")
        p.add_argument("--assignments", help="cluster assignments CSV (default: <out-dir>/assignments.csv)")

    p = sub.add_parser("synth", parents=[common], help="write a synthetic district dataset")
    p.add_argument("--preset", help="default (5 districts x 2 years) or full (38 districts, ~170k rows)")
    p.add_argument("--regimes", help="regime spec JSON")

    sub.add_parser("run-all", parents=[common], help="synth (if enabled) -> ingest -> cluster -> classify -> analyze")
    return parser


def _resolve_config(args) -> dict:
    cfg = config_mod.load(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.strict:
        cfg["data"]["strict"] = True
    if getattr(args, "preset", None):
        cfg["synth"]["preset"] = args.preset
    if getattr(args, "regimes", None):
        cfg["synth"]["regimes"] = args.regimes
    return config_mod.resolve(cfg)


def execute(args) -> int:
    cfg = _resolve_config(args)
    out_dir = args.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR
    command = args.command
    run = pipeline.Run(out_dir, cfg, command)
    if command == "ingest":
        pipeline.stage_ingest(cfg, run, args.inputs or None)
    elif command == "synth":
        pipeline.stage_synth(cfg, run)
    elif command == "cluster":
        dataset = pipeline._dataset_for(run, args.dataset)
        pipeline.stage_cluster(cfg, run, dataset)
    elif command in ("classify", "analyze"):
        dataset = pipeline._dataset_for(run, args.dataset)
        path = args.assignments or run.out_dir / pipeline.ASSIGNMENTS
        run.record_input(path)
        clusters = pipeline.load_assignments(path, dataset)
        stage = pipeline.stage_classify if command == "classify" else pipeline.stage_analyze
        stage(cfg, run, dataset, clusters)
    elif command == "run-all":
        pipeline.run_all(cfg, run)
    manifest = run.finish("manifest.json" if command == "run-all" else f"{command}_manifest.json")
    print(f"{command}: wrote {len(run.outputs)} files, manifest {manifest}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if not args.verbose:
        warnings.simplefilter("default")
    try:
        return execute(args)
    except DroughtError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error [numerical]: {exc}", file=sys.stderr)
        return NumericalError.exit_code


if __name__ == "__main__":
    sys.exit(main())

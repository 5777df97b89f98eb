"""Command-line runner for the experiment presets.

Exit codes: 0 success, 2 invalid configuration or usage, 3 infeasible dataset.
"""
from __future__ import annotations

import argparse
import json
import sys

from .datagen import InfeasibleMarginError
from .experiments import _FAST, PRESETS, ConfigError, ExperimentConfig, preset, run_experiment

_SUBCOMMANDS = {"svm": "svm", "pca": "pca", "discriminate": "discrimination",
                "pipeline": "pipeline"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entangled-sensing", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run a {kind} experiment")
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", help="JSON config file (keys of ExperimentConfig)")
        names = sorted(k for k, v in PRESETS.items() if v["kind"] == kind)
        src.add_argument("--preset", choices=names, help="named figure preset")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--trials", type=int, help="number of trials (overrides the config)")
        p.add_argument("--workers", type=int, help="worker processes for trials")
        p.add_argument("--fast", action="store_true", help="reduced steps/trials for a quick run")
        p.add_argument("--out", required=True, help="output directory")
    return parser


def _load_config(args, kind: str) -> ExperimentConfig:
    overrides = {k: getattr(args, k) for k in ("seed", "trials", "workers")
                 if getattr(args, k) is not None}
    if args.preset:
        return preset(args.preset, fast=args.fast, **overrides)
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
        if cfg.kind != kind:
            raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand")
    else:
        cfg = ExperimentConfig(kind=kind)
    if args.fast:
        overrides = {**_FAST[kind], **overrides}
    return cfg.replace(**overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kind = _SUBCOMMANDS[args.command]
    try:
        config = _load_config(args, kind)
        run = run_experiment(config, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleMarginError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(run["summary"], indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())

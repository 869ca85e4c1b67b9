"""Command line entry point: ``conucb run ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .core import ConfigError, InfeasibleInstanceError
from .env import ArmTableError
from .harness import ExperimentConfig, run_experiment

EXIT_CONFIG = 2
EXIT_INSTANCE = 3
EXIT_IO = 4

_FIELDS = ("arms", "synthetic", "K", "instance_seed", "L", "h", "T", "delta", "policies", "runs", "seed", "out", "stride")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conucb", description="Constrained two-level bandit experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run policies on an arm table and write traces")
    run.add_argument("--config", help="JSON file with any of the options below; flags override it")
    src = run.add_mutually_exclusive_group()
    src.add_argument("--arms", help="CSV with header arm_id,a_mean,b_mean")
    src.add_argument("--synthetic", help="generator name: uniform or conflicting")
    run.add_argument("--K", type=int, help="number of arms for a synthetic instance")
    run.add_argument("--instance-seed", dest="instance_seed", type=int, help="generator seed (default: --seed)")
    run.add_argument("--L", type=int)
    run.add_argument("--h", type=float)
    run.add_argument("--T", type=int)
    run.add_argument("--delta", type=float)
    run.add_argument("--policies", help="comma separated, e.g. conucb,cucb,exp3m,oracle,uniform")
    run.add_argument("--runs", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--stride", type=int)
    run.add_argument("-q", "--quiet", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            values = json.load(fh)
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(values) - set(_FIELDS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for name in _FIELDS:
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    if "arms" in values and args.synthetic is not None:
        values.pop("arms")
    if "synthetic" in values and args.arms is not None:
        values.pop("synthetic")
    if isinstance(values.get("policies"), str):
        values["policies"] = tuple(p.strip() for p in values["policies"].split(",") if p.strip())
    missing = [k for k in ("L", "h", "T", "delta", "out") if k not in values]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join('--' + m for m in missing)}")
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        config = config_from_args(args)
        summary = run_experiment(config)
    except (ConfigError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleInstanceError, ArmTableError) as exc:
        print(f"instance error: {exc}", file=sys.stderr)
        return EXIT_INSTANCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        for name, final in summary["policies"].items():
            print(
                f"{name:8s} reward={final['cum_reward']:.1f} regret={final['cum_regret']:.1f} "
                f"vio_horizon={final['vio_horizon']:.1f} vio_clipped={final['vio_clipped']:.1f} ratio={final['ratio']:.4g}"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())

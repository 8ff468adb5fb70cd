"""Command-line entry point: ``ceafim generate | run | sweep-lambda``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import FimError, InvariantError
from .experiments import ExperimentConfig, generate_files, run_experiment, sweep_lambda

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", help="experiment config JSON")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--delta", type=int, help="number of live-edge samples (overrides config)")
    p.add_argument("--split-timings", action="store_true",
                   help="report algorithm time without network and ensemble setup")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ceafim", description="Fair influence maximisation experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("generate", help="sample a block-model network to edge/group files")
    gen.add_argument("spec", help="SbmSpec JSON")
    gen.add_argument("prefix", help="output prefix; writes <prefix>.edges and <prefix>.groups")
    _add_run_flags(sub.add_parser("run", help="compare algorithms over repetitions"))
    _add_run_flags(sub.add_parser("sweep-lambda", help="sweep the fitness weight"))
    return parser


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_json(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if args.delta is not None:
        overrides["delta"] = args.delta
    if args.split_timings:
        overrides["split_timings"] = True
    return config.replace(**overrides) if overrides else config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            edges, groups = generate_files(args.spec, args.prefix)
            print(f"wrote {edges} and {groups}")
        elif args.command == "run":
            config = _load_config(args)
            run_experiment(config)
            print(f"results in {config.out}")
        else:
            config = _load_config(args)
            sweep_lambda(config)
            print(f"sweep results in {config.out}")
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except FimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

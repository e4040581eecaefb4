"""Command-line front end: ``multiphase {bound,validate,sweep,compare} --config FILE``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import harness
from .errors import ConfigError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multiphase", description=__doc__)
    parser.add_argument("command", choices=harness.COMMANDS)
    parser.add_argument("config_path", nargs="?", metavar="CONFIG", help="config file (same as --config)")
    parser.add_argument("--config", dest="config_flag", metavar="PATH")
    parser.add_argument("--out", metavar="PATH", help="CSV destination (default: stdout)")
    parser.add_argument("--tol", type=float, help="override the run tolerance")
    parser.add_argument("--epsilon", type=float, help="override the coherent-state truncation target")
    return parser


def _apply_overrides(config, args):
    if args.tol is not None:
        config.tol = args.tol
    if args.epsilon is not None:
        config.epsilon = args.epsilon
        config.families = {k: replace(s, epsilon=args.epsilon) for k, s in config.families.items()}
    if args.out is not None:
        config.out = args.out
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    path = args.config_flag or args.config_path
    try:
        if path is None:
            raise ConfigError("a config file is required", "config")
        if args.config_flag and args.config_path and args.config_flag != args.config_path:
            raise ConfigError("config given twice with different paths", "config")
        config = _apply_overrides(harness.load_config(path, args.command), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return harness.EXIT_CONFIG

    rows = harness.run(config)
    text = harness.format_csv(rows, harness.header_notes(config))
    if config.out:
        with open(config.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return harness.exit_code(rows)


if __name__ == "__main__":
    sys.exit(main())

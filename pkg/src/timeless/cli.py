"""Command-line entry point: ``timeless run`` and ``timeless list-scenarios``."""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError
from . import scenarios

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="timeless", description="Run relational-time scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario from a config file or by name")
    run.add_argument("config", nargs="?", help="YAML configuration file")
    run.add_argument("--scenario", help="built-in scenario name (instead of a config file)")
    run.add_argument("--seed", type=int, help="override the top-level seed")
    run.add_argument("--out", help="directory for report.json and timeseries.csv")
    run.add_argument("--json", action="store_true", help="print the full report as JSON")

    sub.add_parser("list-scenarios", help="list built-in scenarios")
    return ap


def _resolve(args):
    if bool(args.config) == bool(args.scenario):
        raise ConfigError("give exactly one of a config path or --scenario")
    if args.scenario:
        cfg = scenarios.builtin_config(args.scenario, args.seed)
    else:
        cfg = scenarios.load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
    if args.out:
        cfg["output"]["dir"] = args.out
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name in scenarios.SCENARIOS:
            print(name)
        return EXIT_OK
    try:
        cfg = _resolve(args)
        report = scenarios.run_scenario(cfg)
    except ConfigError as exc:
        print(f"configuration error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.json:
        print(report.to_json())
    else:
        for c in report.checks:
            status = "PASS" if c.passed else "FAIL"
            print(f"{status}  {c.name}: {scenarios.fmt(c.value)} {c.comparison} {scenarios.fmt(c.threshold)}")
        print(f"{report.scenario}: {'passed' if report.passed else 'FAILED'}")
    return EXIT_OK if report.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

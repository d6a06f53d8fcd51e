"""Command-line interface.

    rofa run --scenario <name|config.json> [--seed N] [--trials N] [--out csv]
    rofa list-scenarios
    rofa validate <config.json>
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_scenario, validate_dict
from .scenarios import list_scenarios, rows_to_csv, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rofa", description="Deterministic OFDMA baseband experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and emit CSV")
    run_p.add_argument("--scenario", required=True,
                       help="preset name or JSON config path")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--trials", type=int, default=None)
    run_p.add_argument("--out", type=Path, default=None,
                       help="CSV output path (default: stdout)")

    sub.add_parser("list-scenarios", help="list scenario presets")

    val_p = sub.add_parser("validate", help="check a scenario config file")
    val_p.add_argument("config", type=Path)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list-scenarios":
        for name, description in list_scenarios():
            print(f"{name:22s} {description}")
        return 0

    if args.command == "validate":
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        problems = validate_dict(data)
        if problems:
            for p in problems:
                print(f"error: {p}", file=sys.stderr)
            return 1
        print(f"{args.config}: ok")
        return 0

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    try:
        scenario = load_scenario(args.scenario, **overrides)
    except (ConfigError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    csv_text = rows_to_csv(run_scenario(scenario))
    if args.out is None:
        sys.stdout.write(csv_text)
    else:
        args.out.write_text(csv_text)
        print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end.

Subcommands: spectrum, evolve, vis-map, dec-map, budget, validate.
Shared flags: --config <path>, --out <path>, --threads <k> and repeatable
--set key=value overrides.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import RunManifest, config_warnings, load_config
from .errors import DomainError, NumericsError
from . import sweeps


def _add_common(parser):
    parser.add_argument("--config", default=None, help="key-value config file")
    parser.add_argument("--out", default=None, help="output CSV path")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for grid sweeps")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry (repeatable)")


def _overrides(pairs):
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise DomainError(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nanorotor",
        description="Rotational tunneling of a levitated nanomagnet: spectra, "
                    "dynamics, decoherence maps and rate budgets.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
            ("spectrum", "eigenvalue scan over one parameter axis"),
            ("evolve", "time trace of the well population"),
            ("vis-map", "tunneling-visibility map over two rotor axes"),
            ("dec-map", "visibility under a decoherence channel"),
            ("budget", "ranked physical decoherence rates"),
            ("validate", "resolve and check a configuration")):
        _add_common(sub.add_parser(name, help=text))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, _overrides(args.set))
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    notes = config_warnings(config)
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)

    manifest = RunManifest(config=config, command=args.command, warnings=notes)
    started = time.time()

    try:
        if args.command == "validate":
            for line in manifest.comment_lines():
                print(line.lstrip("# ").rstrip())
            print(f"ok ({len(config)} keys resolved, {len(notes)} warnings)")
            return 0

        if args.command == "budget":
            report = sweeps.run_budget(config)
            header, rows = sweeps.budget_rows(report)
            print(sweeps.budget_text(report))
            if args.out:
                sweeps.write_csv(args.out, header, rows, manifest)
            manifest.wall_time_s = time.time() - started
            return 0

        runners = {
            "spectrum": lambda: sweeps.run_spectrum(config, args.threads),
            "evolve": lambda: sweeps.run_evolve(config),
            "vis-map": lambda: sweeps.run_visibility_map(config, args.threads),
            "dec-map": lambda: sweeps.run_decoherence_map(config, args.threads),
        }
        header, rows = runners[args.command]()
        if not args.out:
            print("error: --out is required for this command", file=sys.stderr)
            return 2
        sweeps.write_csv(args.out, header, rows, manifest)
        manifest.wall_time_s = time.time() - started
        print(f"{args.command}: wrote {len(rows)} rows to {args.out} "
              f"in {manifest.wall_time_s:.1f} s", file=sys.stderr)
        return 0
    except (DomainError, NumericsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: one subcommand per experiment kind.

Artifacts land in --out as CSV files with .meta.json sidecars; re-running
with the same config and seed reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import EXPERIMENT_KINDS, PRESETS, load_config_dict, parse_config_dict, preset_dict
from .errors import NfsecError
from .experiments import run_experiment, write_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nfsec",
        description="Near-field secure-transmission experiments (CSV artifacts)")
    sub = parser.add_subparsers(dest="kind", required=True, metavar="experiment")
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", type=Path, help="YAML config file (default: a preset)")
        p.add_argument("--preset", choices=PRESETS, default="desk",
                       help="shipped preset to use when no --config is given")
        p.add_argument("--full-scale", action="store_true",
                       help="shortcut for the full-scale 40x40 reference preset")
        p.add_argument("--out", type=Path, default=Path("out"),
                       help="output directory (default: ./out)")
        p.add_argument("--seed", type=int, help="override the experiment seed")
        p.add_argument("--slots", type=int, help="override the slot count K")
        p.add_argument("--trials", type=int, help="override the trial count")
        p.add_argument("--grid", type=str, metavar="NXxNY",
                       help="override the grid resolution, e.g. 41x41")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            raw = load_config_dict(args.config)
        else:
            raw = preset_dict("sec5-full" if args.full_scale else args.preset)
        exp = raw.setdefault("experiment", {})
        exp["kind"] = args.kind
        if args.seed is not None:
            exp["seed"] = args.seed
        if args.slots is not None:
            exp["slots"] = args.slots
        if args.trials is not None:
            exp["trials"] = args.trials
        if args.grid:
            try:
                nx, ny = (int(v) for v in args.grid.lower().split("x"))
            except ValueError:
                print(f"error: --grid expects NXxNY, got {args.grid!r}", file=sys.stderr)
                return 2
            grid = exp.get("grid") or {}
            grid.update(nx=nx, ny=ny)
            exp["grid"] = grid
        config = parse_config_dict(raw)
        artifacts = run_experiment(config)
    except NfsecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for art in artifacts:
        print(write_csv(art, args.out))
    if args.kind == "validate":
        failed = False
        for name, value, threshold, status in artifacts[0].rows:
            print(f"{status:>4}  {name:<28} value={value:.3e} threshold={threshold:.3e}")
            failed |= status == "fail"
        return 1 if failed else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())

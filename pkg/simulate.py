#!/usr/bin/env python3
"""CLI script to run molecular communication parameter sweeps.

Usage:
    python simulate.py [--config run.json] [options] --output sweep.csv

Examples:
    python simulate.py --output ser_vs_d.csv
    python simulate.py --config run.json --sweep D --from 1 --to 25 --steps 25
    python simulate.py --scheme oomosk,csk --mode exact --trials 0 --output exact.csv
"""

import argparse
import logging
import sys
from pathlib import Path

from molcomm import __version__
from molcomm.config import RunConfig, apply_overrides, load_config, resolve_output_path
from molcomm.errors import ConfigError, ConvergenceError
from molcomm.modulation import SCHEMES
from molcomm.sweep import run_sweep

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NOT_CONVERGED = 3


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for the simulate command."""
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Sweep SER and capacity of molecular communication schemes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Available schemes:
  oomosk  - On-off keying per bit across k molecule types
  mosk    - One of 2^k molecule types per symbol
  csk     - Molecule-count levels of a single type

Exit codes: 0 ok, 2 config error, 3 capacity did not converge.
The MOLCOMM_OUTPUT_DIR environment variable sets the directory of a
relative --output and of the default sweep.csv.
""",
    )
    parser.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    parser.add_argument(
        "--sweep",
        choices=["D", "r", "z", "n"],
        default=None,
        help="Swept parameter (default: D)",
    )
    parser.add_argument("--from", dest="sweep_start", type=float, default=None, help="Sweep start")
    parser.add_argument("--to", dest="sweep_stop", type=float, default=None, help="Sweep end")
    parser.add_argument("--steps", dest="sweep_steps", type=int, default=None, help="Sweep points")
    parser.add_argument(
        "--spacing",
        dest="sweep_spacing",
        choices=["linear", "log"],
        default=None,
        help="Sweep spacing (default: linear)",
    )
    parser.add_argument(
        "--trials",
        type=int,
        default=None,
        help="Monte Carlo trials per point; 0 disables (default: 10000)",
    )
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default: 0)")
    parser.add_argument(
        "--scheme",
        default=None,
        help=f"Comma-separated schemes (default: {','.join(s.value for s in SCHEMES)})",
    )
    parser.add_argument(
        "--mode",
        choices=["gaussian", "exact", "exact-binomial"],
        default=None,
        help="Arrival tail evaluation (default: gaussian)",
    )
    parser.add_argument(
        "--path",
        choices=["binomial", "first_passage"],
        default=None,
        help="Monte Carlo count path (default: binomial)",
    )
    parser.add_argument("--workers", type=int, default=None, help="Parallel sweep processes")
    parser.add_argument("--k", type=int, default=None, help="Bits per symbol (default: 2)")
    parser.add_argument(
        "--molecules-per-bit",
        dest="molecules_per_bit",
        type=int,
        default=None,
        help="Molecules per bit (default: 125)",
    )
    parser.add_argument("--z", type=int, default=None, help="Detection threshold (default: 20)")
    parser.add_argument("--output", default=None, help="Output CSV path")
    parser.add_argument("--progress", action="store_true", help="Show a progress bar")
    parser.add_argument("--verbose", action="store_true", help="Log sweep progress")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Load the config file (if any) and apply flag overrides; flags win."""
    config = load_config(args.config) if args.config else RunConfig()
    schemes = [s.strip() for s in args.scheme.split(",") if s.strip()] if args.scheme else None
    return apply_overrides(
        config,
        schemes=schemes,
        k=args.k,
        molecules_per_bit=args.molecules_per_bit,
        z=args.z,
        trials=args.trials,
        seed=args.seed,
        mode=args.mode,
        path=args.path,
        workers=args.workers,
        output=args.output,
        sweep_parameter=args.sweep,
        sweep_start=args.sweep_start,
        sweep_stop=args.sweep_stop,
        sweep_steps=args.sweep_steps,
        sweep_spacing=args.sweep_spacing,
    )


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the sweep CLI."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        config = config_from_args(args)
        output = resolve_output_path(config.output)
        print(f"Running {config.sweep.parameter} sweep...")
        result = run_sweep(config, output, progress=args.progress)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        for diagnostic in e.diagnostics:
            print(f"  {diagnostic}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except ConvergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED

    for message in result.warnings:
        print(f"warning: {message}", file=sys.stderr)

    print("\nSweep complete!")
    print(f"  Schemes: {', '.join(s.value for s in config.scheme_list)}")
    print(
        f"  Sweep: {config.sweep.parameter} {config.sweep.start:g} -> {config.sweep.stop:g} "
        f"({config.sweep.steps} steps, {config.sweep.spacing})"
    )
    print(f"  Mode: {config.mode}")
    print(f"  Trials: {config.trials}")
    print(f"  Seed: {config.seed}")
    print(f"  Rows: {len(result.rows)}")
    print(f"  Output: {result.csv_path}")
    print(f"  Metadata: {result.metadata_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

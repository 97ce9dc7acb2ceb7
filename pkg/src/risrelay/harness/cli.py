"""Command-line entry point: ``risrelay <command> --config FILE [options]``."""
from __future__ import annotations

import argparse
import sys

from .. import analytic, asymptotic, montecarlo
from .config import METHODS, ConfigError, RunConfig, load_config
from .sweep import SweepSpec, rows_to_csv, run_sweep
from .validation import validate_config

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2
DEFAULT_TRIALS = 1_000_000


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _methods(text: str) -> tuple[str, ...]:
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    if not methods or any(m not in METHODS for m in methods):
        raise argparse.ArgumentTypeError(f"choose from {','.join(METHODS)}")
    return methods


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risrelay",
        description="Outage probability of RIS-assisted decode-and-forward relaying under interference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analytic": "closed-form outage at snr_db",
        "asymptotic": "high-SNR outage, diversity order, coding gain and dominant hop at snr_db",
        "simulate": "Monte Carlo outage at snr_db",
        "sweep": "evaluate methods over snr_grid_db and write CSV",
        "validate": "cross-check closed form, quadrature, simulation and asymptotics",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="key = value configuration file")
        p.add_argument("--trials", type=_positive, help="Monte Carlo trials (overrides config)")
        p.add_argument("--seed", type=_u64, help="master seed (overrides config)")
        p.add_argument("--workers", type=_positive, help="parallel workers (overrides config)")
        if name == "sweep":
            p.add_argument("--out", help="CSV output path (default: stdout)")
            p.add_argument("--methods", type=_methods, help="comma list of " + ",".join(METHODS))
    return parser


def _settings(args, run: RunConfig) -> tuple[int, int, int]:
    trials = args.trials or run.trials or DEFAULT_TRIALS
    seed = args.seed if args.seed is not None else (run.seed or 0)
    workers = args.workers or run.workers or 1
    return trials, seed, workers


def _run(args) -> int:
    run = load_config(args.config)
    trials, seed, workers = _settings(args, run)

    if args.command == "analytic":
        est = analytic.outage_probability(run.base())
        print(f"pout = {est.probability!r}")
        if est.flags:
            print(f"flags = {';'.join(est.flags)}")
    elif args.command == "asymptotic":
        res = asymptotic.asymptotic_outage(run.base())
        print(f"pout_asymptotic = {res.probability!r}")
        print(f"diversity_order = {res.diversity_order}")
        print(f"coding_gain = {res.coding_gain!r}")
        print(f"dominant_hop = {res.dominant_hop}")
    elif args.command == "simulate":
        try:
            spec = montecarlo.SimSpec(run.base(), trials, seed, workers)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        res = montecarlo.simulate(spec)
        print(f"pout_mc = {res.estimate!r}")
        print(f"outages = {res.outage_count} / {res.trials}")
        print(f"ci99 = [{res.ci_low!r}, {res.ci_high!r}]")
        if res.flags:
            print(f"flags = {';'.join(res.flags)}")
    elif args.command == "sweep":
        methods = args.methods or run.methods or ("analytic",)
        base = run.base(snr_db=run.grid()[0] if run.grid() else 0.0)
        try:
            spec = SweepSpec(base, run.grid(), methods, trials, seed, workers)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        text = rows_to_csv(run_sweep(spec))
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    elif args.command == "validate":
        grid = run.grid()
        if not grid:
            raise ConfigError("validate needs a non-empty SNR grid")
        lines, ok = validate_config(run.base(snr_db=grid[0]), grid, trials, seed, workers)
        print("\n".join(lines))
        return EXIT_OK if ok else EXIT_VALIDATION
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports bad flags with status 2, which is also our config-error code
        return int(exc.code or 0)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

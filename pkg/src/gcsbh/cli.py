"""Command-line entry point.

Exit codes: 0 success, 1 invalid configuration, 2 propagation failure,
3 comparison tolerance exceeded.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .scenarios import (
    PRESETS,
    SWEEP_PRESETS,
    ConfigError,
    load_mapping,
    load_sweep_preset,
    run_scenario,
    run_sweep,
    sweep_flags,
    validate_config,
    validate_sweep_config,
)
from .trajectory import PropagationError, population_columns, read_trajectory_csv

EXIT_OK, EXIT_CONFIG, EXIT_PROPAGATION, EXIT_COMPARE = 0, 1, 2, 3

log = logging.getLogger("gcsbh")


def _common(p):
    p.add_argument("--config", type=Path, help="flat key: value configuration file")
    p.add_argument("--preset", help="bundled preset name (see `presets`)")
    p.add_argument("--seed", type=int, help="grid sampling seed")
    p.add_argument("--oracle", choices=("auto", "on", "off"), help="exact Fock comparison")
    p.add_argument("--out", type=Path, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="gcsbh", description=(
        "Multi-configuration coherent-state dynamics of the Bose-Hubbard chain."))
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="propagate one scenario")
    _common(run)

    sweep = sub.add_parser("sweep", help="run an (N, beta) grid of scenarios")
    _common(sweep)
    sweep.add_argument("--workers", type=int, default=1)

    sub.add_parser("presets", help="list bundled presets")

    cmp_ = sub.add_parser("compare", help="compare populations in two trajectory CSVs")
    cmp_.add_argument("first", type=Path)
    cmp_.add_argument("second", type=Path)
    cmp_.add_argument("--tol", type=float, default=0.01)
    return parser


def _overrides(args):
    return dict(seed=args.seed, run_oracle=args.oracle,
                output_dir=None if args.out is None else str(args.out))


def _raw(args):
    if args.config is None and args.preset is None:
        raise ConfigError(["give --config or --preset"])
    raw = {}
    if args.config is not None:
        try:
            raw = load_mapping(args.config)
        except OSError as exc:
            raise ConfigError([f"cannot read {args.config}: {exc}"]) from None
    if args.preset is not None:
        raw["preset"] = args.preset
    return raw


def cmd_run(args):
    cfg = validate_config(_raw(args), **_overrides(args))
    log.info("running %s: M=%d S=%d N=%d Lambda=%.3g", cfg.name, cfg.model.M, cfg.model.S,
             cfg.grid.N, cfg.lam)
    res = run_scenario(cfg)
    for note in res.notices:
        print(note, file=sys.stderr)
    traj = res.trajectory
    print(f"{cfg.name}: wall {res.wall_time:.1f} s, norm drift {traj.norm_drift():.2e}, "
          f"energy drift {traj.energy_drift():.2e}")
    if res.max_oracle_deviation is not None:
        print(f"max |population - exact| = {res.max_oracle_deviation:.3e}")
    for key, path in res.paths.items():
        print(f"  {key}: {path}")
    return EXIT_OK


def cmd_sweep(args):
    if args.preset in SWEEP_PRESETS and args.config is None:
        ov = {k: v for k, v in _overrides(args).items() if v is not None}
        cfg = load_sweep_preset(args.preset, **ov)
    else:
        cfg = validate_sweep_config(_raw(args), **_overrides(args))
    rows = run_sweep(cfg, workers=max(1, args.workers))
    for r in rows:
        dev = r["max_oracle_deviation"]
        status = r["error"] or ("n/a" if dev is None else f"{dev:.3e}")
        print(f"N={r['N']:5d} beta={r['beta']:.5g}  max dev vs exact: {status}")
    for beta in sweep_flags(rows):
        print(f"warning: at beta={beta:.5g} the largest N deviates more than the smallest",
              file=sys.stderr)
    return EXIT_PROPAGATION if any(r["error"] for r in rows) else EXIT_OK


def cmd_presets(_args):
    for name, fn in PRESETS.items():
        print(f"{name:24s} {fn.__doc__.strip().splitlines()[0]}")
    for name, (base, Ns, betas) in SWEEP_PRESETS.items():
        print(f"{name:24s} sweep of {base} over N={Ns} and {len(betas)} spacings")
    return EXIT_OK


def cmd_compare(args):
    try:
        a = population_columns(read_trajectory_csv(args.first))
        b = population_columns(read_trajectory_csv(args.second))
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError([f"cannot compare: {exc}"]) from None
    if a.shape != b.shape:
        raise ConfigError([f"population tables differ in shape: {a.shape} vs {b.shape}"])
    dev = float(np.abs(a - b).max())
    print(f"max |population difference| = {dev:.6e} (tol {args.tol:g})")
    return EXIT_OK if dev <= args.tol else EXIT_COMPARE


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "presets": cmd_presets, "compare": cmd_compare}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except PropagationError as exc:
        print(f"propagation failed at t={exc.t:.6g}: {exc}", file=sys.stderr)
        return EXIT_PROPAGATION


if __name__ == "__main__":
    sys.exit(main())

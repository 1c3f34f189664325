"""Command-line interface.

Subcommands::

    burgers-freeze preset [NAME] [--list] [-o FILE]
    burgers-freeze run-freeze (--config FILE | --preset NAME) [--set KEY=VALUE ...] [--output-dir DIR]
    burgers-freeze run-direct (--config FILE | --preset NAME) --t-end T [--set ...] [-o FILE]
    burgers-freeze reconstruct SNAPSHOT --p P [--lo ... --hi ... --n ...] [-o FILE]
    burgers-freeze verify-equivalence (--config FILE | --preset NAME) --t-end T [--tolerance TOL]
    burgers-freeze selftest

Failures exit with status 1 and print one JSON line
``{"error": <kind>, "message": <text>}`` on stderr; usage errors exit with 2.
The environment variable ``BURGERS_FREEZE_OUTPUT_DIR`` overrides the
configured output directory.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np
import yaml

from . import io
from .config import PRESETS, ConfigError, SolverConfig, load_config, preset, render_config
from .driver import FreezingState, direct_solve, make_equation, run, verify_equivalence
from .grid import Grid, mass
from .lie_group import GroupElement, LieAlgebraElement
from .reconstruction import mass_law_check, reconstruct, similarity_residual

logger = logging.getLogger("burgers_freeze")


def _parse_set(items: list) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = yaml.safe_load(value)
    return out


def _load(args) -> SolverConfig:
    overrides = _parse_set(args.set)
    if args.config:
        cfg = load_config(args.config)
        return cfg.replace(**overrides) if overrides else cfg
    if args.preset:
        return preset(args.preset, **overrides)
    raise ConfigError("either --config or --preset is required")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", help="YAML configuration file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="named experiment configuration")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a configuration key")


def cmd_preset(args) -> int:
    if args.list or not args.name:
        for name in PRESETS:
            print(name)
        return 0
    text = render_config(preset(args.name))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_run_freeze(args) -> int:
    cfg = _load(args)
    out = args.output_dir or cfg.resolved_output_dir
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.yaml"), "w", encoding="utf-8") as fh:
        fh.write(render_config(cfg))
    eq = make_equation(cfg)
    count = 0

    def save(state):
        nonlocal count
        res = similarity_residual(state.v, state.mu, eq)
        io.write_snapshot(os.path.join(out, f"snapshot_{count:05d}.bin"), io.record_from_state(state, res))
        count += 1

    traj = run(cfg, callback=save)
    io.write_series(os.path.join(out, "series.csv"), traj.series, cfg.d)
    final = traj.final
    summary = {
        "tau": final.tau, "t": final.rho, "mu": final.mu.coords.tolist(), "alpha": final.g.alpha,
        "b": final.g.b.tolist(), "steps": len(traj.stats), "reference_updates": traj.n_reference_updates,
        "mass_law_deviation": mass_law_check(traj), "output_dir": out,
    }
    print(json.dumps(summary))
    return 0


def cmd_run_direct(args) -> int:
    cfg = _load(args)
    u0 = cfg.initial_field()
    eq = make_equation(cfg, u0.grid)
    # the reduced equation runs in reduced time |a| t
    t_red = cfg.reduction.reduced_time(args.t_end) if cfg.reduction is not None else args.t_end
    u = direct_solve(eq, u0, t_red, cfg.cfl, cfg.dt_max)
    path = args.output or os.path.join(cfg.resolved_output_dir, "direct.bin")
    rec = io.SnapshotRecord(t_red, t_red, GroupElement.identity(cfg.d), LieAlgebraElement.zero(cfg.d),
                            mass(u), eq.original_rhs(u).norm(), u)
    io.write_snapshot(path, rec)
    print(json.dumps({"t": t_red, "norm": u.norm(), "output": path}))
    return 0


def cmd_reconstruct(args) -> int:
    rec = io.read_snapshot(args.snapshot)
    state = FreezingState(rec.tau, rec.field, rec.mu, rec.g, rec.t)
    target = None
    if args.lo is not None or args.hi is not None or args.n is not None:
        if args.lo is None or args.hi is None:
            raise ConfigError("--lo and --hi must be given together")
        target = Grid(args.lo, args.hi, args.n or list(rec.grid.n))
    u, t = reconstruct(state, target, args.p)
    out = io.SnapshotRecord(t, t, GroupElement.identity(u.grid.d), LieAlgebraElement.zero(u.grid.d),
                            mass(u), 0.0, u)
    path = args.output or os.path.splitext(args.snapshot)[0] + "_original.bin"
    io.write_snapshot(path, out)
    print(json.dumps({"t": t, "lo": list(u.grid.lo), "hi": list(u.grid.hi), "output": path}))
    return 0


def cmd_verify(args) -> int:
    cfg = _load(args)
    report = verify_equivalence(cfg, None, args.t_end)
    ok = report.relative_error <= args.tolerance
    print(json.dumps({"t_end": report.t_end, "tau_end": report.tau_end,
                      "relative_error": report.relative_error, "tolerance": args.tolerance, "pass": ok}))
    return 0 if ok else 1


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="burgers-freeze", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("preset", help="list presets or print one as YAML")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("run-freeze", help="integrate the freezing system")
    _add_config_args(p)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_run_freeze)

    p = sub.add_parser("run-direct", help="integrate the original equation")
    _add_config_args(p)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_run_direct)

    p = sub.add_parser("reconstruct", help="map a snapshot back to original coordinates")
    p.add_argument("snapshot")
    p.add_argument("--p", type=float, required=True, help="flux exponent of the run")
    p.add_argument("--lo", type=float, nargs="+")
    p.add_argument("--hi", type=float, nargs="+")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify-equivalence", help="compare freezing + reconstruction with a direct solve")
    _add_config_args(p)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--tolerance", type=float, default=5e-2)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("selftest", help="run quick internal consistency checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, io.SnapshotFormatError, ValueError, OSError, ArithmeticError,
            RuntimeError, np.linalg.LinAlgError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: run, converge, bench."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .presets import PRESETS, preset
from .run import convergence_study, run


def _apply_overrides(cfg, args):
    if args.out:
        cfg.out_dir = args.out
    if args.scheme:
        cfg.scheme = args.scheme
    if args.dt:
        cfg.dt = args.dt
    if args.adaptive:
        cfg.adapt.enabled = args.adaptive == "on"
    if args.seed is not None:
        cfg.initial.seed = args.seed
    return cfg


def _common_flags(p):
    p.add_argument("--out", help="output directory")
    p.add_argument("--scheme", choices=["bdf2", "bdf3", "cnab", "ark2"])
    p.add_argument("--dt", type=float)
    p.add_argument("--adaptive", choices=["on", "off"])
    p.add_argument("--seed", type=int)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="rdmix",
                                 description="mixed FEM reaction-diffusion solver")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="run a configured simulation")
    p_run.add_argument("--config", required=True)
    _common_flags(p_run)

    p_conv = sub.add_parser("converge", help="convergence study")
    p_conv.add_argument("--config")
    p_conv.add_argument("--bench", choices=sorted(PRESETS))
    p_conv.add_argument("--mode", choices=["mesh", "dt", "order"], default="mesh")
    p_conv.add_argument("--levels", type=int, default=4)
    p_conv.add_argument("--csv", help="write the table to this path")
    _common_flags(p_conv)

    p_bench = sub.add_parser("bench", help="run a named benchmark preset")
    p_bench.add_argument("name", choices=sorted(PRESETS))
    _common_flags(p_bench)

    args = ap.parse_args(argv)
    try:
        if args.cmd == "run":
            cfg = _apply_overrides(load_config(args.config), args)
            rep = run(cfg)
            last = rep.records[-1]
            print(f"completed {cfg.name}: t = {last['time']:g}, "
                  f"dofs = {last['dofs_flux'] + last['dofs_mass']}")
            if rep.csv_path:
                print(f"csv: {rep.csv_path}")
        elif args.cmd == "converge":
            if args.bench:
                cfg = preset(args.bench)
            elif args.config:
                cfg = load_config(args.config)
            else:
                raise ConfigError("converge needs --config or --bench")
            cfg = _apply_overrides(cfg, args)
            rows = convergence_study(cfg, args.levels, args.mode, args.csv)
            for row in rows:
                slope = row.get("slope_m")
                print(f"level {row['level']}: param {row['parameter']:.6g} "
                      f"err_m {row['err_m']:.4e}"
                      + (f" slope {slope:.3f}" if slope is not None else ""))
            if args.csv:
                print(f"csv: {args.csv}")
        else:
            cfg = _apply_overrides(preset(args.name), args)
            if cfg.out_dir is None:
                cfg.out_dir = f"out-{cfg.name}"
            rep = run(cfg)
            last = rep.records[-1]
            print(f"completed {cfg.name}: t = {last['time']:g}, "
                  f"dofs = {last['dofs_flux'] + last['dofs_mass']}")
            print(f"csv: {rep.csv_path}")
    except (ConfigError, KeyError, OSError) as exc:
        print(f"rdmix-error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver/numerics failures
        print(f"rdmix-error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

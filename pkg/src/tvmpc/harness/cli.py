"""Command line entry point: ``tvmpc-walk run|list|verify``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .acceptance import CRITERIA, format_table, run_all
from .config import ConfigError, apply_overrides, format_config, load_config, split_pair
from .runner import emit_csv, run_scenario
from .scenarios import builtin_scenarios


def _resolve(target: str, builtins: dict):
    if target in builtins:
        return builtins[target]
    if Path(target).is_file():
        return load_config(target, builtins)
    raise ConfigError(f"{target!r} is neither a built-in scenario nor a config file "
                      f"(built-ins: {', '.join(builtins)})")


def _run(args) -> int:
    builtins = builtin_scenarios()
    targets = list(builtins) if args.target == "all" else [args.target]
    if args.out and len(targets) > 1:
        raise ConfigError("--out needs a single scenario")
    clean = True
    for name in targets:
        cfg = _resolve(name, builtins)
        if args.override:
            cfg = apply_overrides(cfg, [split_pair(o) for o in args.override])
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.show_config:
            sys.stdout.write(format_config(cfg))
        trace, m = run_scenario(cfg)
        if args.out:
            emit_csv(trace, args.out)
        ok = m.completed and m.violations == 0
        clean &= ok
        state = "completed" if m.completed else f"aborted at row {m.abort_row}: {m.abort_reason}"
        print(f"{cfg.name}: {state}; rows {len(trace)}; ZMP violations {m.violations}; "
              f"slack cycles {m.slack_cycles}; max |zmp - ref| x {m.max_track_err[0]:.4f} "
              f"y {m.max_track_err[1]:.4f}; max DCM offset {m.max_dcm_offset:.3f}")
    return 0 if clean else 1


def _list(args) -> int:
    for name, cfg in builtin_scenarios().items():
        extra = []
        if cfg.stair_rise:
            extra.append(f"rise {cfg.stair_rise} m")
        if cfg.noise_bound:
            extra.append(f"noise +/-{cfg.noise_bound} m")
        if cfg.height_offset:
            extra.append(f"height offset {cfg.height_offset:+} m")
        for d in cfg.disturbances:
            extra.append(f"push {d.force} N at {d.start} s for {d.duration} s")
        print(f"{name:<12s} {', '.join(extra) or 'nominal'}")
    return 0


def _verify(args) -> int:
    results = run_all(args.only or None)
    print(format_table(results))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tvmpc-walk", description="Time-varying MPC biped walking simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a built-in scenario or a key = value config file")
    run.add_argument("target", help="scenario name, config path, or 'all'")
    run.add_argument("--out", help="write the per-cycle trace as CSV")
    run.add_argument("--seed", type=int, help="noise seed")
    run.add_argument("--override", action="append", metavar="KEY=VALUE", default=[],
                     help="override a config key (repeatable)")
    run.add_argument("--show-config", action="store_true", help="print the resolved config first")
    run.set_defaults(func=_run)

    ls = sub.add_parser("list", help="list built-in scenarios")
    ls.set_defaults(func=_list)

    ver = sub.add_parser("verify", help="run the acceptance checks and print a pass/fail table")
    ver.add_argument("--only", action="append", choices=list(CRITERIA), help="run only these checks")
    ver.set_defaults(func=_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

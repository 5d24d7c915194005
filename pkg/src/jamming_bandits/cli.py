"""Command line entry point.

Exit status: 0 success, 1 invalid configuration, 2 file-system trouble.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import bounds
from .config import ConfigError, load_config
from .harness import _action_dict, _jsonable, emit_outputs, grid_oracle, run_experiment
from .jb import compute_m, compute_m_elimination
from .presets import load_preset, preset_names

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jamming-bandits", description="Learn jamming strategies from ACK/NACK feedback.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one configured experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, action="append", help="override the seed list (repeatable)")
    run.add_argument("--scale", type=float, default=1.0)
    run.add_argument("--out", default=None, help="output directory (default runs/<name>)")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--checkpoint-dir", default=None, help="resume from / save round checkpoints here")

    orc = sub.add_parser("oracle", help="grid-search the best arm")
    orc.add_argument("--config", required=True)
    orc.add_argument("--grid-m", type=int, default=100)

    sw = sub.add_parser("sweep", help="run a named experiment recipe")
    sw.add_argument("--preset", required=True, choices=preset_names())
    sw.add_argument("--scale", type=float, default=1.0)
    sw.add_argument("--out", default=None)
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--seeds", type=int, default=None, help="use only the first N seeds")

    bd = sub.add_parser("bounds", help="print the theoretical bound values for a config")
    bd.add_argument("--config", required=True)
    bd.add_argument("--epsilon", type=float, default=0.1)
    return p


def _run(config, out, jobs, checkpoint_dir=None):
    traces, summary = run_experiment(config, jobs=jobs, checkpoint_dir=checkpoint_dir)
    out = out or os.path.join("runs", config.name)
    for path in emit_outputs(traces, summary, out):
        print(path)
    print(f"modal arm {summary['modal_arm']} in {summary['modal_arm_fraction']:.0%} of seeds")


def _bounds_report(config, epsilon):
    T = config.horizon
    n_mod = len(config.space.schemes)
    m = compute_m(T, config.holder)
    report = {"horizon": T, "n_mod": n_mod, "m": m, "epsilon": epsilon,
              **bounds.bound_overlays(T, config.holder, n_mod, m, epsilon)}
    if T >= 4:
        report["m_elimination"] = compute_m_elimination(T, config.holder)
    return report


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config).scaled(args.scale)
            if args.seed:
                config = config.with_seeds(args.seed)
            _run(config, args.out, args.jobs, args.checkpoint_dir)
        elif args.command == "sweep":
            config = load_preset(args.preset, args.scale)
            if args.seeds:
                config = config.with_seeds(config.seeds[: args.seeds])
            _run(config, args.out or os.path.join("runs", args.preset), args.jobs)
        elif args.command == "oracle":
            config = load_config(args.config)
            res = grid_oracle(config, args.grid_m)
            print(json.dumps(_jsonable({"grid_m": args.grid_m, "best_arm": res.best,
                                        "best_action": _action_dict(res.best_action),
                                        "best_value": res.best_value}), indent=2))
        elif args.command == "bounds":
            config = load_config(args.config)
            print(json.dumps(_jsonable(_bounds_report(config, args.epsilon)), indent=2))
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

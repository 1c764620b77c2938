"""Command-line entry point: ``adaptive-gm run|oracle|list-presets``.

Exit status: 0 on success, 2 if any method diverged, 1 on config or I/O
errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import (
    ConfigError,
    load_config,
    load_preset,
    preset_names,
    run_experiment,
    run_oracle_theorem,
)

log = logging.getLogger("adaptive_gm")


def _overridden(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(seed=args.seed, output_dir=args.out_dir,
                              max_iterations=args.max_iters, tolerance=args.tol)


def _cmd_run(args) -> int:
    cfg = _overridden(args)
    if cfg.experiment == "oracle-theorem":
        return _cmd_oracle(args)
    result = run_experiment(cfg, jobs=args.jobs)
    for s in result.summaries:
        log.info("%-24s %6d iters  grad=%.3e  rho=%s  %s", s.label, s.iterations, s.grad_norm,
                 "" if s.rho_est is None else f"{s.rho_est:.6f}", s.stop_reason)
    log.info("wrote %d files to %s", len(result.files), cfg.output_dir)
    return 2 if result.diverged else 0


def _cmd_oracle(args) -> int:
    cfg = _overridden(args)
    path = run_oracle_theorem(cfg)
    log.info("wrote %s", path)
    return 0


def _cmd_list(args) -> int:
    for name in preset_names():
        cfg = load_preset(name)
        print(f"{name:32s} {cfg.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptive-gm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_ in (("run", _cmd_run, "run an experiment config or preset"),
                              ("oracle", _cmd_oracle, "run an oracle-theorem config or preset")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="path to a JSON config, or a preset name")
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir")
        p.add_argument("--max-iters", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--jobs", type=int, default=1, help="methods run concurrently")
        p.set_defaults(func=func)
    p = sub.add_parser("list-presets", help="list the shipped preset configs")
    p.set_defaults(func=_cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        log.error("error: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line surface: validate, oracle, run, sweep.

Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
failures (projection/solver/integrity errors).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path


from .config import ConfigError, ExperimentConfig, load_config
from .delays import IntegrityError
from .games import SolverError, solve_critical_point, vi_residual
from .geometry import ProjectionError, verify_interior_ball
from .io import (read_oracle_json, write_oracle_json, write_stats_json,
                 write_trace_csv)
from .runner import RunConfig, replicate
from .schedules import validate_params

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _to_run_config(cfg: ExperimentConfig, args) -> RunConfig:
    seed = cfg.seed if args.seed is None else args.seed
    estimator = cfg.estimator if getattr(args, "estimator", None) is None \
        else args.estimator
    return RunConfig(game=cfg.game, delay_model=cfg.delay_model,
                     schedule=cfg.schedule, horizon=cfg.horizon, seed=seed,
                     replications=cfg.replications, stride=cfg.stride,
                     estimator=estimator, strict=getattr(args, "strict", False))


def _load_oracle(cfg: ExperimentConfig):
    if cfg.oracle_path is None:
        print("note: no oracle file configured; rel_dist/potential_gap will be nan")
        return None, None
    path = Path(cfg.oracle_path)
    if not path.exists():
        print(f"warning: oracle file {path} missing; "
              "rel_dist/potential_gap will be nan", file=sys.stderr)
        return None, None
    return read_oracle_json(path)


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    min_r = min(ball.radius for ball in cfg.game.interior_balls)
    report = validate_params(cfg.schedule, cfg.delay_model.alpha,
                             min_ball_radius=min_r)
    print(report)
    geometry_ok = True
    for i, (fset, ball) in enumerate(zip(cfg.game.feasible_sets,
                                         cfg.game.interior_balls)):
        ok = verify_interior_ball(fset, ball)
        geometry_ok &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] interior_ball[{i}]: "
              f"radius {ball.radius:.6g}")
    if args.strict and (not report.ok or not geometry_ok):
        return EXIT_CONFIG
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    x_star = solve_critical_point(cfg.game)
    phi_star = cfg.game.potential(x_star) if cfg.game.has_potential else None
    residual = vi_residual(cfg.game, x_star)
    out = args.out or cfg.oracle_path
    if out is None:
        raise ConfigError("no output path: pass --out or set output.oracle")
    write_oracle_json(out, x_star, phi_star, residual)
    print(f"oracle written to {out} (vi_residual={residual:.3e})")
    return EXIT_OK


def _run_one(cfg: ExperimentConfig, args, trace_path, stats_path) -> None:
    x_star, phi_star = _load_oracle(cfg)
    rc = replace(_to_run_config(cfg, args), x_star=x_star, phi_star=phi_star)
    results = replicate(rc, n_jobs=args.jobs)
    if trace_path is None:
        raise ConfigError("no trace path: pass --out or set output.trace")
    write_trace_csv(trace_path, results)
    if stats_path is not None:
        write_stats_json(stats_path, results)
    print(f"trace written to {trace_path} "
          f"({len(results)} run(s), horizon {rc.horizon})")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    _run_one(cfg, args, args.out or cfg.trace_path, cfg.stats_path)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not cfg.scenarios:
        print("no scenarios configured; nothing to do")
        return EXIT_OK
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, scen_cfg in cfg.scenarios:
        _run_one(scen_cfg, args, out_dir / f"{name}.csv",
                 out_dir / f"{name}_stats.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditmd",
        description="Bandit mirror descent for games under feedback delays")
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="check schedule and geometry")
    p_val.add_argument("--config", required=True)
    p_val.add_argument("--strict", action="store_true")
    p_val.set_defaults(func=cmd_validate)

    p_orc = sub.add_parser("oracle", help="solve for the critical point")
    p_orc.add_argument("--config", required=True)
    p_orc.add_argument("--out", default=None)
    p_orc.set_defaults(func=cmd_oracle)

    p_run = sub.add_parser("run", help="simulate and write trace CSV")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--estimator", choices=["residual", "single-point"],
                       default=None)
    p_run.add_argument("--strict", action="store_true")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.set_defaults(func=cmd_run)

    p_sw = sub.add_parser("sweep", help="run every configured scenario")
    p_sw.add_argument("--config", required=True)
    p_sw.add_argument("--out-dir", required=True)
    p_sw.add_argument("--seed", type=int, default=None)
    p_sw.add_argument("--estimator", choices=["residual", "single-point"],
                      default=None)
    p_sw.add_argument("--strict", action="store_true")
    p_sw.add_argument("--jobs", type=int, default=1)
    p_sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError,) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, ProjectionError, IntegrityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

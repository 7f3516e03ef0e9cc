"""Experiment configuration files: strict schema, YAML syntax, scenario sweeps.

A configuration has sections ``game``, ``delays``, ``schedules``, ``run``, and
``output`` plus an optional ``scenarios`` list whose entries override
individual sections. Unknown keys are rejected everywhere; a missing or wrong
``schema_version`` is a hard error. Every float written back out carries 17
significant digits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .delays import DelayModel
from .games import (GameModel, QuadraticGame, ThermalGame, ThermalGameSpec,
                    random_quadratic_game)
from .geometry import FeasibleSet, InteriorBall
from .schedules import ScheduleParams

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Configuration files that cannot be parsed or fail the schema."""


def _check_keys(mapping: dict, allowed: set[str], where: str,
                required: set[str] = frozenset()):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be a mapping")
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")
    missing = required - set(mapping)
    if missing:
        raise ConfigError(f"missing key(s) {sorted(missing)} in {where}")


def _per_building(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape == (n,):
        return arr
    raise ConfigError(f"{name} must be a scalar or a list of {n} values")


def _per_building_slot(value, n: int, t: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape == (t,):
        return np.tile(arr, (n, 1))
    if arr.shape == (n, t):
        return arr
    raise ConfigError(f"{name} must be a list of {t} values or {n} such lists")


def _build_thermal(cfg: dict) -> ThermalGame:
    allowed = {"kind", "buildings", "slots", "energy_price", "peak_penalty",
               "smoothing", "lambda_range", "lambda_seed", "cliques",
               "thermal_a", "thermal_b", "thermal_c", "comfort_lower",
               "comfort_upper", "power_cap", "r_initial", "ball"}
    _check_keys(cfg, allowed, "game",
                required={"kind", "buildings", "slots", "energy_price",
                          "peak_penalty", "smoothing", "cliques"})
    n = int(cfg["buildings"])
    t = int(cfg["slots"])
    lam_lo, lam_hi = cfg.get("lambda_range", [0.04, 0.06])
    lam_seed = int(cfg.get("lambda_seed", 1234))
    lam = np.random.default_rng(lam_seed).uniform(lam_lo, lam_hi, size=(n, t))
    cliques = [[int(b) - 1 for b in cl] for cl in cfg["cliques"]]  # 1-based file
    spec = ThermalGameSpec(
        n_buildings=n,
        horizon=t,
        energy_price=np.asarray(cfg["energy_price"], dtype=float),
        peak_penalty=float(cfg["peak_penalty"]),
        smoothing=float(cfg["smoothing"]),
        lam=lam,
        cliques=cliques,
        a=_per_building(cfg.get("thermal_a", 0.9), n, "thermal_a"),
        b=_per_building(cfg.get("thermal_b", 0.5), n, "thermal_b"),
        c=_per_building(cfg.get("thermal_c", 1.0), n, "thermal_c"),
        comfort_lower=_per_building_slot(cfg.get("comfort_lower", [-np.inf] * t),
                                         n, t, "comfort_lower"),
        comfort_upper=_per_building_slot(cfg.get("comfort_upper", [np.inf] * t),
                                         n, t, "comfort_upper"),
        power_cap=_per_building(cfg.get("power_cap", 5.0), n, "power_cap"),
        r_initial=_per_building(cfg.get("r_initial", 0.0), n, "r_initial"),
    )
    balls = None
    if "ball" in cfg:
        _check_keys(cfg["ball"], {"center", "radius"}, "game.ball",
                    required={"center", "radius"})
        ball = InteriorBall(np.asarray(cfg["ball"]["center"], dtype=float),
                            float(cfg["ball"]["radius"]))
        balls = [ball] * n
    return ThermalGame(spec, interior_balls=balls)


def _build_quadratic(cfg: dict) -> QuadraticGame:
    allowed = {"kind", "preset", "jacobian", "linear", "dims", "box"}
    _check_keys(cfg, allowed, "game", required={"kind"})
    if "preset" in cfg:
        p = cfg["preset"]
        _check_keys(p, {"players", "dim", "seed", "mu", "coupling", "box"},
                    "game.preset", required={"players", "dim", "seed"})
        lo, hi = p.get("box", [0.0, 1.0])
        return random_quadratic_game(int(p["players"]), int(p["dim"]),
                                     int(p["seed"]), box=(float(lo), float(hi)),
                                     mu=float(p.get("mu", 1.0)),
                                     coupling=float(p.get("coupling", 0.25)))
    for key in ("jacobian", "linear", "dims"):
        if key not in cfg:
            raise ConfigError("explicit quadratic games need jacobian/linear/dims")
    dims = [int(d) for d in cfg["dims"]]
    lo, hi = cfg.get("box", [0.0, 1.0])
    sets = [FeasibleSet(np.full(d, float(lo)), np.full(d, float(hi)))
            for d in dims]
    return QuadraticGame(np.asarray(cfg["jacobian"], dtype=float),
                         np.asarray(cfg["linear"], dtype=float), dims, sets)


def build_game(cfg: dict) -> GameModel:
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("game section needs a 'kind' field")
    kind = cfg["kind"]
    if kind == "thermal":
        return _build_thermal(cfg)
    if kind == "quadratic":
        return _build_quadratic(cfg)
    raise ConfigError(f"unknown game kind {kind!r}")


def build_delay_model(cfg: dict) -> DelayModel:
    _check_keys(cfg, {"kind", "coeff", "alpha", "offset", "mode"}, "delays",
                required={"kind"})
    try:
        return DelayModel(kind=cfg["kind"], coeff=float(cfg.get("coeff", 0.0)),
                          alpha=float(cfg.get("alpha", 0.0)),
                          offset=float(cfg.get("offset", 0.0)),
                          mode=cfg.get("mode", "deterministic"))
    except ValueError as exc:
        raise ConfigError(f"delays: {exc}") from exc


def build_schedule(cfg: dict) -> ScheduleParams:
    _check_keys(cfg, {"gamma0", "k_gamma", "alpha_gamma", "delta0", "k_delta",
                      "alpha_delta"}, "schedules")
    try:
        return ScheduleParams(
            gamma0=float(cfg.get("gamma0", 1.0)),
            k_gamma=float(cfg.get("k_gamma", 1000.0)),
            alpha_gamma=float(cfg.get("alpha_gamma", 0.9)),
            delta0=float(cfg.get("delta0", 1.0)),
            k_delta=float(cfg.get("k_delta", 10.0)),
            alpha_delta=float(cfg.get("alpha_delta", 0.6)))
    except ValueError as exc:
        raise ConfigError(f"schedules: {exc}") from exc


@dataclass
class ExperimentConfig:
    """Parsed experiment file with built model objects."""

    game: GameModel
    delay_model: DelayModel
    schedule: ScheduleParams
    horizon: int
    seed: int
    replications: int
    stride: int
    estimator: str
    trace_path: str | None = None
    stats_path: str | None = None
    oracle_path: str | None = None
    scenarios: list[tuple[str, "ExperimentConfig"]] = field(default_factory=list)


_RUN_KEYS = {"horizon", "seed", "replications", "stride", "estimator"}
_OUTPUT_KEYS = {"trace", "stats", "oracle"}
_TOP_KEYS = {"schema_version", "game", "delays", "schedules", "run", "output",
             "scenarios"}


def _assemble(doc: dict, where: str = "config") -> ExperimentConfig:
    _check_keys(doc, _TOP_KEYS, where,
                required={"schema_version", "game", "delays", "schedules", "run"})
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {doc['schema_version']!r} in {where}")
    run_cfg = doc["run"]
    _check_keys(run_cfg, _RUN_KEYS, f"{where}.run", required={"horizon"})
    out_cfg = doc.get("output", {})
    _check_keys(out_cfg, _OUTPUT_KEYS, f"{where}.output")
    estimator = run_cfg.get("estimator", "residual")
    if estimator not in ("residual", "single-point"):
        raise ConfigError(f"unknown estimator {estimator!r} in {where}.run")
    cfg = ExperimentConfig(
        game=build_game(doc["game"]),
        delay_model=build_delay_model(doc["delays"]),
        schedule=build_schedule(doc["schedules"]),
        horizon=int(run_cfg["horizon"]),
        seed=int(run_cfg.get("seed", 0)),
        replications=int(run_cfg.get("replications", 1)),
        stride=int(run_cfg.get("stride", 1)),
        estimator=estimator,
        trace_path=out_cfg.get("trace"),
        stats_path=out_cfg.get("stats"),
        oracle_path=out_cfg.get("oracle"),
    )
    for scen in doc.get("scenarios", []):
        _check_keys(scen, {"name", "delays", "schedules", "run"},
                    f"{where}.scenarios[]", required={"name"})
        derived = {k: v for k, v in doc.items() if k != "scenarios"}
        for section in ("delays", "schedules", "run"):
            if section in scen:
                merged = dict(doc[section])
                merged.update(scen[section])
                derived[section] = merged
        cfg.scenarios.append((str(scen["name"]), _assemble(
            derived, where=f"{where}.scenarios[{scen['name']}]")))
    return cfg


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment file; errors carry line/column info."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"cannot parse {path}{loc}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path} does not contain a configuration mapping")
    return _assemble(doc)

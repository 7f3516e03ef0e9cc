"""Bandit mirror descent for multi-player continuous games under feedback delays."""

from .delays import (DelayModel, EstimateRecord, FeedbackRecord, IntegrityError,
                     PlayerQueues, arrival_iteration, sample_delay,
                     starvation_count)
from .estimates import (PerturbationContext, perturb, residual_estimate,
                        sample_unit_sphere, single_point_estimate)
from .games import (GameModel, QuadraticGame, SolverError, ThermalGame,
                    ThermalGameSpec, default_thermal_game, lse_value,
                    potential_value, random_quadratic_game, shapley_share,
                    solve_critical_point, thermal_gradient, thermal_objective)
from .geometry import (EUCLIDEAN, BlockProjector, FeasibleSet, InteriorBall,
                       MirrorStructure, ProjectionError, bregman,
                       project_polytope, prox_step, shrink_interior_ball,
                       verify_interior_ball)
from .runner import (BanditMirrorDescent, RunConfig, RunResult, RunStats,
                     TraceRow, aggregate_traces, replicate, run)
from .schedules import (ScheduleParams, ValidationReport, query_radius,
                        step_size, validate_params)

__version__ = "0.1.0"

__all__ = [
    "BanditMirrorDescent", "BlockProjector", "DelayModel", "EUCLIDEAN",
    "EstimateRecord", "FeasibleSet", "FeedbackRecord", "GameModel",
    "IntegrityError", "InteriorBall", "MirrorStructure", "PerturbationContext",
    "PlayerQueues", "ProjectionError", "QuadraticGame", "RunConfig",
    "RunResult", "RunStats", "ScheduleParams", "SolverError", "ThermalGame",
    "ThermalGameSpec", "TraceRow", "ValidationReport", "aggregate_traces",
    "arrival_iteration", "bregman", "default_thermal_game", "lse_value",
    "perturb", "potential_value", "project_polytope", "prox_step",
    "query_radius", "random_quadratic_game", "replicate", "residual_estimate",
    "run", "sample_delay", "sample_unit_sphere", "shapley_share",
    "shrink_interior_ball", "single_point_estimate", "solve_critical_point",
    "starvation_count", "step_size", "thermal_gradient", "thermal_objective",
    "validate_params", "verify_interior_ball",
]

"""Main simulation loop: play, route delayed feedback, pop estimates, prox-update.

Two interchangeable engines implement the same per-iteration procedure. The
``reference`` engine walks the update loop literally with per-player
:class:`~banditmd.delays.PlayerQueues`. The ``fast`` engine exploits the fact
that delays are independent of the trajectory: it presamples every delay,
derives each estimate's completion iteration, resolves the whole
priority-queue consumption schedule in one integer pass, and then runs the
numerical dynamics vectorized across players. Both engines produce
bit-identical trajectories; tests assert it.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator

from .delays import (DelayModel, EstimateRecord, FeedbackRecord, IntegrityError,
                     PlayerQueues, arrival_iteration)
from .estimates import PerturbationContext, perturb
from .games import GameModel
from .geometry import EUCLIDEAN, BlockProjector, prox_step, verify_interior_ball
from .schedules import ScheduleParams, query_radius, step_size, validate_params
from .streams import (HOMOGENEOUS_DELAY_PLAYER, delay_stream, direction_stream,
                      unit_directions)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@dataclass
class RunConfig:
    """Everything one simulation run depends on; (config, seed) fixes the output."""

    game: GameModel
    delay_model: DelayModel
    schedule: ScheduleParams
    horizon: int
    seed: int = 0
    replications: int = 1
    stride: int = 1
    estimator: str = "residual"
    x_star: np.ndarray | None = None
    phi_star: float | None = None
    x0: np.ndarray | None = None
    strict: bool = False
    engine: str = "auto"  # "auto" | "fast" | "reference"
    check_properties: bool = True

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError("horizon must be at least 2")
        if self.stride < 1:
            raise ValueError("stride must be at least 1")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    rel_dist: float
    potential_gap: float
    ghat_norm: float
    starved_players: int
    wall_ms: float


@dataclass
class RunStats:
    horizon: int
    seed: int
    estimator: str
    starvation_counts: list[int]
    max_consumption_lag: int
    leftover_cache_sizes: list[int]
    never_delivered: list[int]
    estimates_created: list[int]
    ghat_norm_max: float
    ghat_norms: np.ndarray | None = None        # per-iteration, k = 1..K
    starved_flags: np.ndarray | None = None     # (N, K) bool
    cache_size_history: np.ndarray | None = None  # reference engine only

    def summary(self) -> dict:
        return {
            "horizon": self.horizon,
            "seed": self.seed,
            "estimator": self.estimator,
            "starvation_counts": [int(v) for v in self.starvation_counts],
            "max_consumption_lag": int(self.max_consumption_lag),
            "leftover_cache_sizes": [int(v) for v in self.leftover_cache_sizes],
            "never_delivered": [int(v) for v in self.never_delivered],
            "estimates_created": [int(v) for v in self.estimates_created],
            "ghat_norm_max": float(self.ghat_norm_max),
        }


@dataclass
class RunResult:
    trace: list[TraceRow]
    stats: RunStats
    x_final: np.ndarray
    xhat_final: np.ndarray


# --- shared precomputation -----------------------------------------------------


@dataclass
class _RunInputs:
    gamma: np.ndarray          # gamma[k], k = 1..K (index 0 unused)
    delta: np.ndarray          # delta[t], t = 1..K+1 (index 0 unused)
    directions: list[np.ndarray]  # per player, (K+2, n_i), row 0 unused
    delays: np.ndarray         # (N, K+2) float, col 0 unused
    arrivals: np.ndarray       # (N, K+2) int64, col 0 unused


def _prepare_inputs(config: RunConfig) -> _RunInputs:
    game, K = config.game, config.horizon
    N = game.n_players
    ks = np.arange(0, K + 1, dtype=float)
    gamma = np.empty(K + 1)
    gamma[1:] = step_size(config.schedule, ks[1:])
    gamma[0] = np.nan
    ts = np.arange(0, K + 2, dtype=float)
    delta = np.empty(K + 2)
    delta[1:] = query_radius(config.schedule, ts[1:])
    delta[0] = np.nan

    directions = []
    for i, n_i in enumerate(game.dims):
        rows = unit_directions(direction_stream(config.seed, i), K + 1, n_i)
        block = np.zeros((K + 2, n_i))
        block[1:] = rows
        directions.append(block)

    caps = config.delay_model.cap(ts[1:])  # (K+1,)
    delays = np.zeros((N, K + 2))
    if config.delay_model.kind == "homogeneous-sublinear":
        if config.delay_model.mode == "deterministic":
            row = caps
        else:
            raw = delay_stream(config.seed, HOMOGENEOUS_DELAY_PLAYER).random(K + 1)
            row = caps * raw
        delays[:, 1:] = row[None, :]
    else:
        for i in range(N):
            if config.delay_model.mode == "deterministic":
                delays[i, 1:] = caps
            else:
                raw = delay_stream(config.seed, i).random(K + 1)
                delays[i, 1:] = caps * raw
    arrivals = np.zeros((N, K + 2), dtype=np.int64)
    arrivals[:, 1:] = np.ceil(ts[None, 1:] + delays[:, 1:]).astype(np.int64)
    return _RunInputs(gamma, delta, directions, delays, arrivals)


def _validate_run(config: RunConfig):
    game = config.game
    min_r = min(ball.radius for ball in game.interior_balls)
    report = validate_params(config.schedule, config.delay_model.alpha,
                             min_ball_radius=min_r)
    radius_fail = [c for c in report.checks if c.name == "radius_bound" and not c.passed]
    if radius_fail:
        raise ValueError(radius_fail[0].detail)
    if config.strict and not report.ok:
        raise ValueError("schedule validation failed: "
                         + ", ".join(report.failed_names()))
    for i, (fset, ball) in enumerate(zip(game.feasible_sets, game.interior_balls)):
        if not verify_interior_ball(fset, ball):
            raise ValueError(f"interior ball of player {i} is not certified")


def _initial_state(config: RunConfig) -> np.ndarray:
    if config.x0 is not None:
        x0 = np.asarray(config.x0, dtype=float).copy()
        if x0.size != config.game.total_dim:
            raise ValueError("x0 has the wrong dimension")
        return x0
    return np.concatenate([ball.center for ball in config.game.interior_balls])


def _metrics(config: RunConfig, xhat: np.ndarray) -> tuple[float, float]:
    if config.x_star is not None:
        denom = float(np.linalg.norm(config.x_star))
        rel = float(np.linalg.norm(xhat - config.x_star)) / denom
    else:
        rel = float("nan")
    if config.phi_star is not None and config.game.has_potential:
        gap = float(config.game.potential(xhat)) - float(config.phi_star)
    else:
        gap = float("nan")
    return rel, gap


# --- fast engine: precomputed queue schedule -------------------------------------


def _pop_schedule_impl(ins_iter, ins_t, row_ptr, K, N, out_s):
    """Resolve every pop of the per-player estimate queues in one integer pass.

    ``ins_iter``/``ins_t`` hold, per player segment, the completion iteration
    and timestamp of every estimate, sorted by completion iteration. Writes the
    consumed timestamp into ``out_s[i, k]`` (0 when the queue is empty).
    """
    for i in range(N):
        lo, hi = row_ptr[i], row_ptr[i + 1]
        heap = np.empty(hi - lo, dtype=np.int64)
        size = 0
        ptr = lo
        for k in range(1, K + 1):
            while ptr < hi and ins_iter[ptr] == k:
                # push ins_t[ptr]
                pos = size
                heap[pos] = ins_t[ptr]
                size += 1
                while pos > 0:
                    parent = (pos - 1) // 2
                    if heap[parent] > heap[pos]:
                        heap[parent], heap[pos] = heap[pos], heap[parent]
                        pos = parent
                    else:
                        break
                ptr += 1
            if size > 0:
                out_s[i, k] = heap[0]
                size -= 1
                heap[0] = heap[size]
                pos = 0
                while True:
                    left = 2 * pos + 1
                    if left >= size:
                        break
                    smallest = left
                    right = left + 1
                    if right < size and heap[right] < heap[left]:
                        smallest = right
                    if heap[smallest] < heap[pos]:
                        heap[pos], heap[smallest] = heap[smallest], heap[pos]
                        pos = smallest
                    else:
                        break
            else:
                out_s[i, k] = 0
    return out_s


_pop_schedule = njit(cache=True)(_pop_schedule_impl) if _HAVE_NUMBA else _pop_schedule_impl


def _resolve_queue_schedule(config: RunConfig, inputs: _RunInputs):
    """Formation iterations, pop schedule, and queue statistics for the run."""
    K, N = config.horizon, config.game.n_players
    A = inputs.arrivals
    ts = np.arange(2, K + 2, dtype=np.int64)
    if config.estimator == "residual":
        form = np.maximum(A[:, 1:K + 1], A[:, 2:K + 2])  # completion of G_t, t=2..K+1
    else:
        form = A[:, 2:K + 2].copy()
    ins_iter_rows, ins_t_rows, counts = [], [], []
    for i in range(N):
        mask = form[i] <= K
        f = form[i][mask]
        t = ts[mask]
        order = np.argsort(f, kind="stable")
        ins_iter_rows.append(f[order])
        ins_t_rows.append(t[order])
        counts.append(f.size)
    row_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    ins_iter = (np.concatenate(ins_iter_rows) if sum(counts) else
                np.zeros(0, dtype=np.int64))
    ins_t = (np.concatenate(ins_t_rows) if sum(counts) else
             np.zeros(0, dtype=np.int64))
    s_arr = np.zeros((N, K + 1), dtype=np.int64)
    _pop_schedule(ins_iter, ins_t, row_ptr, K, N, s_arr)
    return s_arr, form, np.asarray(counts)


def _check_queue_properties(config: RunConfig, s_arr: np.ndarray):
    """Runtime checks of the feedback-strategy lemmas along the schedule."""
    K = config.horizon
    model = config.delay_model
    ks = np.arange(1, K + 1, dtype=float)
    starved = s_arr[:, 1:] == 0
    k_empty = np.cumsum(starved, axis=1)
    bound = np.minimum(ks, np.ceil(model.cap(ks)) + 1.0) + 1e-9
    if np.any(k_empty > bound[None, :]):
        i, k = np.argwhere(k_empty > bound[None, :])[0]
        raise IntegrityError(
            f"starvation count {k_empty[i, k]} of player {i} exceeds the "
            f"lemma bound {bound[k]:.3f} at iteration {k + 1}")
    mask = s_arr[:, 1:] >= 2
    if np.any(mask):
        s_vals = s_arr[:, 1:][mask].astype(float)
        k_vals = np.broadcast_to(ks[None, :], mask.shape)[mask]
        slack = s_vals + model.cap(s_vals) + 1.0 - k_vals
        if np.any(slack < -1e-9):
            bad = int(np.argmin(slack))
            raise IntegrityError(
                f"consumed estimate with timestamp {int(s_vals[bad])} at "
                f"iteration {int(k_vals[bad])} violates the freshness bound")


def _fast_engine(config: RunConfig, inputs: _RunInputs) -> RunResult:
    game, K = config.game, config.horizon
    N = game.n_players
    dims = game.dims
    T = dims[0]
    n_over = np.asarray(dims, dtype=float)
    projector = BlockProjector(game.feasible_sets)

    s_arr, form, created = _resolve_queue_schedule(config, inputs)
    if config.check_properties:
        _check_queue_properties(config, s_arr)

    U3 = np.stack(inputs.directions)          # (N, K+2, T)
    delta, gamma = inputs.delta, inputs.gamma
    r_vec = np.array([b.radius for b in game.interior_balls])
    p2d = np.stack([b.center for b in game.interior_balls])

    J = np.zeros((N, K + 2))
    coef = np.zeros((N, K + 2))
    x2d = _initial_state(config).reshape(N, T)

    def play(k_next: int, x_now: np.ndarray) -> np.ndarray:
        d = delta[k_next]
        t_r = d / r_vec
        xhat = (1.0 - t_r)[:, None] * x_now + t_r[:, None] * p2d \
            + d * U3[:, k_next]
        J[:, k_next] = game.all_objectives(xhat.reshape(-1))
        if config.estimator == "residual":
            coef[:, k_next] = (n_over / d) * (J[:, k_next] - J[:, k_next - 1])
        else:
            coef[:, k_next] = (n_over / d) * J[:, k_next]
        return xhat

    xhat2d = play(1, x2d)
    J[:, 0] = J[:, 1]
    if config.estimator == "residual":
        coef[:, 1] = (n_over / delta[1]) * (J[:, 1] - J[:, 0])

    rows_idx = np.arange(N)
    ghat_norms = np.empty(K + 1)
    ghat_norms[0] = np.nan
    trace: list[TraceRow] = []
    start = time.perf_counter()
    for k in range(1, K + 1):
        t_vec = s_arr[:, k]
        active = t_vec >= 2
        coef_sel = np.where(active, coef[rows_idx, t_vec], 0.0)
        ghat_norms[k] = float(np.sqrt(np.sum(coef_sel * coef_sel)))
        if k % config.stride == 0:
            rel, gap = _metrics(config, xhat2d.reshape(-1))
            trace.append(TraceRow(k, rel, gap, ghat_norms[k],
                                  int(np.sum(~active)),
                                  (time.perf_counter() - start) * 1e3))
        if active.any():
            G2d = coef_sel[:, None] * U3[rows_idx, t_vec]
            z = x2d - gamma[k] * G2d
            x2d = projector(z.reshape(-1)).reshape(N, T)
        xhat2d = play(k + 1, x2d)

    if not np.isfinite(J[:, 1:]).all():
        raise IntegrityError("non-finite objective value encountered")

    starved = s_arr[:, 1:] == 0
    nonzero = s_arr[:, 1:] >= 2
    lags = np.broadcast_to(np.arange(1, K + 1)[None, :], nonzero.shape) - s_arr[:, 1:]
    max_lag = int(lags[nonzero].max()) if nonzero.any() else 0
    A = inputs.arrivals
    delivered = A[:, 1:] <= K
    never = (K + 1) - delivered.sum(axis=1)
    if config.estimator == "residual":
        # a cached value t is dropped once G_t and G_{t+1} both exist (t=1 only
        # feeds G_2 and therefore lingers once delivered)
        full_use = np.zeros((N, K + 2), dtype=bool)
        full_use[:, 2:K + 1] = (form[:, :K - 1] <= K) & (form[:, 1:K] <= K)
        leftovers = (delivered & ~full_use[:, 1:]).sum(axis=1)
    else:
        leftovers = np.zeros(N, dtype=int)
    stats = RunStats(
        horizon=K, seed=config.seed, estimator=config.estimator,
        starvation_counts=[int(v) for v in starved.sum(axis=1)],
        max_consumption_lag=max_lag,
        leftover_cache_sizes=[int(v) for v in leftovers],
        never_delivered=[int(v) for v in never],
        estimates_created=[int(v) for v in created],
        ghat_norm_max=float(np.nanmax(ghat_norms[1:])),
        ghat_norms=ghat_norms[1:].copy(),
        starved_flags=starved.copy(),
    )
    return RunResult(trace, stats, x2d.reshape(-1).copy(), xhat2d.reshape(-1).copy())


# --- reference engine: literal queues --------------------------------------------


def _reference_engine(config: RunConfig, inputs: _RunInputs) -> RunResult:
    game, K = config.game, config.horizon
    N = game.n_players
    dims = game.dims
    slices = game.block_slices
    n_over = np.asarray(dims, dtype=float)
    delta, gamma = inputs.delta, inputs.gamma
    queues = [PlayerQueues(dims[i], config.estimator) for i in range(N)]

    # buckets[k][i] = timestamps whose feedback reaches player i at iteration k
    buckets: dict[int, dict[int, list[int]]] = {}
    for i in range(N):
        for t in range(1, K + 2):
            k_arr = arrival_iteration(t, float(inputs.delays[i, t]))
            assert k_arr == int(inputs.arrivals[i, t])
            if k_arr <= K:
                buckets.setdefault(k_arr, {}).setdefault(i, []).append(t)

    J = np.zeros((N, K + 2))
    x = _initial_state(config)

    def play(k_next: int, x_now: np.ndarray) -> np.ndarray:
        xhat = np.empty_like(x_now)
        for i, sl in enumerate(slices):
            ctx = PerturbationContext(game.interior_balls[i], delta[k_next],
                                      inputs.directions[i][k_next])
            _, xhat[sl] = perturb(x_now[sl], ctx)
        J[:, k_next] = game.all_objectives(xhat)
        return xhat

    xhat = play(1, x)
    J[:, 0] = J[:, 1]

    ghat_norms = np.empty(K + 1)
    ghat_norms[0] = np.nan
    starved = np.zeros((N, K), dtype=bool)
    cache_hist = np.zeros((N, K), dtype=np.int64)
    max_lag = 0
    trace: list[TraceRow] = []
    model = config.delay_model
    start = time.perf_counter()
    for k in range(1, K + 1):
        for i, ts_arrived in buckets.get(k, {}).items():
            recs = [FeedbackRecord(t, float(J[i, t]), inputs.directions[i][t],
                                   float(delta[t])) for t in ts_arrived]
            queues[i].ingest(recs)
        pops: list[EstimateRecord] = []
        coef_sel = np.zeros(N)
        for i in range(N):
            starved[i, k - 1] = queues[i].queue_empty
            cache_hist[i, k - 1] = queues[i].cache_size
            est = queues[i].pop_earliest()
            pops.append(est)
            if est.timestamp >= 2:
                coef_sel[i] = est.coef
                max_lag = max(max_lag, k - est.timestamp)
                if config.check_properties:
                    if est.timestamp + model.cap(est.timestamp) + 1.0 < k - 1e-9:
                        raise IntegrityError(
                            f"consumed estimate {est.timestamp} at iteration {k} "
                            "violates the freshness bound")
        ghat_norms[k] = float(np.sqrt(np.sum(coef_sel * coef_sel)))
        if k % config.stride == 0:
            rel, gap = _metrics(config, xhat)
            trace.append(TraceRow(k, rel, gap, ghat_norms[k],
                                  int(starved[:, k - 1].sum()),
                                  (time.perf_counter() - start) * 1e3))
        x_next = x.copy()
        for i, sl in enumerate(slices):
            est = pops[i]
            if est.timestamp >= 2:
                y = gamma[k] * est.estimate
                x_next[sl] = prox_step(EUCLIDEAN, game.feasible_sets[i], x[sl], y)
        x = x_next
        xhat = play(k + 1, x)

    if config.check_properties:
        ks = np.arange(1, K + 1, dtype=float)
        bound = np.minimum(ks, np.ceil(model.cap(ks)) + 1.0) + 1e-9
        if np.any(np.cumsum(starved, axis=1) > bound[None, :]):
            raise IntegrityError("starvation count exceeds the lemma bound")

    delivered = inputs.arrivals[:, 1:] <= K
    stats = RunStats(
        horizon=K, seed=config.seed, estimator=config.estimator,
        starvation_counts=[int(v) for v in starved.sum(axis=1)],
        max_consumption_lag=max_lag,
        leftover_cache_sizes=[q.cache_size for q in queues],
        never_delivered=[int((K + 1) - delivered[i].sum()) for i in range(N)],
        estimates_created=[q.estimates_created for q in queues],
        ghat_norm_max=float(np.nanmax(ghat_norms[1:])),
        ghat_norms=ghat_norms[1:].copy(),
        starved_flags=starved.copy(),
        cache_size_history=cache_hist,
    )
    return RunResult(trace, stats, x.copy(), xhat.copy())


# --- public API -------------------------------------------------------------------


def run(config: RunConfig) -> RunResult:
    """Execute one seeded run; the output depends only on (config, seed)."""
    _validate_run(config)
    inputs = _prepare_inputs(config)
    engine = config.engine
    uniform = len(set(config.game.dims)) == 1
    if engine == "auto":
        engine = "fast" if uniform else "reference"
    if engine == "fast":
        if not uniform:
            raise ValueError("fast engine requires equal player dimensions")
        return _fast_engine(config, inputs)
    if engine == "reference":
        return _reference_engine(config, inputs)
    raise ValueError(f"unknown engine {config.engine!r}")


def _run_task(config: RunConfig) -> RunResult:
    return run(config)


def replicate(config: RunConfig, n_jobs: int = 1) -> list[RunResult]:
    """Run seeds seed, seed+1, ..., seed+replications-1 and collect the results.

    Runs are independent; with ``n_jobs > 1`` they execute in worker processes
    and are merged in seed order, so the output never depends on scheduling.
    """
    configs = [replace(config, seed=config.seed + r)
               for r in range(config.replications)]
    if n_jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=min(n_jobs, len(configs))) as pool:
            return list(pool.map(_run_task, configs))
    return [run(c) for c in configs]


def aggregate_traces(results: list[RunResult]) -> dict[str, np.ndarray]:
    """Per-iteration median and interquartile range across replications."""
    if not results:
        raise ValueError("no results to aggregate")
    iters = np.array([row.iteration for row in results[0].trace])
    for res in results[1:]:
        if [r.iteration for r in res.trace] != list(iters):
            raise ValueError("replications logged different iterations")
    out = {"iteration": iters}
    for name in ("rel_dist", "potential_gap", "ghat_norm"):
        mat = np.array([[getattr(row, name) for row in res.trace]
                        for res in results])
        out[f"{name}_median"] = np.median(mat, axis=0)
        out[f"{name}_q25"] = np.percentile(mat, 25, axis=0)
        out[f"{name}_q75"] = np.percentile(mat, 75, axis=0)
    return out


class BanditMirrorDescent(BaseEstimator):
    """Scikit-learn style front end for the delayed bandit learning loop.

    Hyperparameters mirror the run configuration as flat scalars so
    ``get_params``/``set_params``/``clone`` work as usual; ``fit`` takes a
    :class:`~banditmd.games.GameModel` and stores the trajectory, metrics
    trace, and queue statistics as fitted attributes.
    """

    def __init__(self, horizon: int = 10_000, seed: int = 0,
                 estimator: str = "residual", stride: int = 100,
                 gamma0: float = 1.0, k_gamma: float = 1000.0,
                 alpha_gamma: float = 0.9, delta0: float = 1.0,
                 k_delta: float = 10.0, alpha_delta: float = 0.6,
                 delay_kind: str = "heterogeneous-bounded",
                 delay_coeff: float = 0.0, delay_alpha: float = 0.0,
                 delay_offset: float = 0.0, delay_mode: str = "deterministic",
                 strict: bool = False):
        self.horizon = horizon
        self.seed = seed
        self.estimator = estimator
        self.stride = stride
        self.gamma0 = gamma0
        self.k_gamma = k_gamma
        self.alpha_gamma = alpha_gamma
        self.delta0 = delta0
        self.k_delta = k_delta
        self.alpha_delta = alpha_delta
        self.delay_kind = delay_kind
        self.delay_coeff = delay_coeff
        self.delay_alpha = delay_alpha
        self.delay_offset = delay_offset
        self.delay_mode = delay_mode
        self.strict = strict

    def _build_config(self, game: GameModel, x_star, phi_star) -> RunConfig:
        schedule = ScheduleParams(self.gamma0, self.k_gamma, self.alpha_gamma,
                                  self.delta0, self.k_delta, self.alpha_delta)
        delay = DelayModel(self.delay_kind, self.delay_coeff, self.delay_alpha,
                           self.delay_offset, self.delay_mode)
        return RunConfig(game=game, delay_model=delay, schedule=schedule,
                         horizon=self.horizon, seed=self.seed,
                         stride=self.stride, estimator=self.estimator,
                         x_star=x_star, phi_star=phi_star, strict=self.strict)

    def fit(self, game: GameModel, x_star: np.ndarray | None = None,
            phi_star: float | None = None):
        """Run the learning loop on ``game``; returns self."""
        config = self._build_config(game, x_star, phi_star)
        result = run(config)
        self.validation_report_ = validate_params(
            config.schedule, config.delay_model.alpha,
            min_ball_radius=min(b.radius for b in game.interior_balls))
        self.trace_ = result.trace
        self.stats_ = result.stats
        self.x_final_ = result.x_final
        self.xhat_final_ = result.xhat_final
        self.n_iter_ = self.horizon
        return self

    def predict(self, game: GameModel | None = None) -> np.ndarray:
        """Return the final played action profile of the fitted run."""
        if not hasattr(self, "xhat_final_"):
            raise RuntimeError("call fit before predict")
        return self.xhat_final_

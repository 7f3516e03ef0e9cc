"""Feedback delay models, the value cache, and the estimate priority queue.

A realized objective value played at iteration ``t`` with delay ``d`` becomes
available at iteration ``ceil(t + d)``. Each player keeps two structures: a
cache of received values (a residual estimate needs two consecutive ones, and
they may arrive far apart) and a min-priority queue of finished estimates
keyed by timestamp. Every update consumes the earliest available estimate;
an empty queue yields the zero sentinel and the action stays put.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

DELAY_KINDS = ("heterogeneous-bounded", "homogeneous-sublinear")
DELAY_MODES = ("deterministic", "uniform")
ESTIMATOR_KINDS = ("residual", "single-point")


class IntegrityError(RuntimeError):
    """A simulation-level contract was violated (duplicate feedback, etc.)."""


@dataclass(frozen=True)
class DelayModel:
    """Delay cap ``c * k**alpha + offset`` with deterministic or uniform draws.

    ``heterogeneous-bounded`` draws independently per player;
    ``homogeneous-sublinear`` gives every player the same delay at each
    iteration. ``alpha < 1`` keeps the growth sublinear.
    """

    kind: str = "heterogeneous-bounded"
    coeff: float = 0.0
    alpha: float = 0.0
    offset: float = 0.0
    mode: str = "deterministic"

    def __post_init__(self):
        if self.kind not in DELAY_KINDS:
            raise ValueError(f"unknown delay kind {self.kind!r}")
        if self.mode not in DELAY_MODES:
            raise ValueError(f"unknown delay mode {self.mode!r}")
        if self.coeff < 0.0 or self.offset < 0.0:
            raise ValueError("coeff and offset must be nonnegative")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("delay exponent alpha must lie in [0, 1)")

    def cap(self, k):
        """Upper bound on any delay sampled at iteration ``k`` (vectorized)."""
        k = np.asarray(k, dtype=float)
        out = self.coeff * k**self.alpha + self.offset
        return float(out) if out.ndim == 0 else out


def sample_delay(model: DelayModel, player: int, k: int,
                 rng: np.random.Generator) -> float:
    """One delay draw for iteration ``k``: the cap itself, or uniform below it.

    Homogeneous models must be fed the shared delay stream so the draw is
    player-independent.
    """
    if k < 1:
        raise ValueError("iterations are 1-based")
    cap = model.cap(k)
    if model.mode == "deterministic":
        return cap
    return cap * float(rng.random())


def arrival_iteration(t: int, d: float) -> int:
    """Iteration at which feedback played at ``t`` with delay ``d`` arrives.

    The unique integer ``k`` with ``k - 1 < t + d <= k``, i.e. ``ceil(t + d)``.
    """
    if t < 1 or d < 0.0:
        raise ValueError("need t >= 1 and d >= 0")
    return int(math.ceil(t + d))


@dataclass
class FeedbackRecord:
    """One realized objective value with the play-time direction and radius."""

    timestamp: int
    value: float
    direction: np.ndarray
    radius: float
    usage_count: int = 0
    estimate_formed: bool = False  # whether G_timestamp has been created

    @property
    def expected_uses(self) -> int:
        # the value at t=1 only ever feeds G_2 (G_1 is the zero convention)
        return 1 if self.timestamp == 1 else 2


@dataclass(frozen=True)
class EstimateRecord:
    """A finished pseudo-gradient estimate, stored as coefficient * direction."""

    timestamp: int
    coef: float
    direction: np.ndarray

    @property
    def estimate(self) -> np.ndarray:
        return self.coef * self.direction

    @property
    def is_sentinel(self) -> bool:
        return self.timestamp == 1 and self.coef == 0.0


class PlayerQueues:
    """Per-player value cache and estimate priority queue.

    Owned by a single run; ``ingest`` implements the pairing rules of the
    update loop (form ``G_{t+1}`` and ``G_t`` when the neighbors of an arrival
    are cached, drop values used twice) and ``pop_earliest`` consumes the
    estimate with the smallest timestamp, falling back to the zero sentinel.
    """

    def __init__(self, dim: int, estimator: str = "residual"):
        if estimator not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind {estimator!r}")
        self.dim = int(dim)
        self.estimator = estimator
        self.value_cache: dict[int, FeedbackRecord] = {}
        self.last_consumed = 0
        self.estimates_created = 0
        self._heap: list[int] = []
        self._pending: dict[int, EstimateRecord] = {}
        self._delivered: set[int] = set()
        self._sentinel = EstimateRecord(1, 0.0, np.zeros(self.dim))

    # -- feedback intake ----------------------------------------------------

    def ingest(self, arrivals: list[FeedbackRecord]) -> list[EstimateRecord]:
        """Insert newly arrived feedback and return every estimate it completes."""
        for rec in arrivals:
            if rec.timestamp in self._delivered:
                raise IntegrityError(
                    f"feedback for timestamp {rec.timestamp} delivered twice")
            self._delivered.add(rec.timestamp)
        if self.estimator == "single-point":
            return self._ingest_single_point(arrivals)
        created: list[EstimateRecord] = []
        for rec in arrivals:
            self.value_cache[rec.timestamp] = rec
        for rec in arrivals:
            t = rec.timestamp
            newer = self.value_cache.get(t + 1)
            if newer is not None and not newer.estimate_formed:
                created.append(self._form(newer, rec))
            if t >= 2:
                older = self.value_cache.get(t - 1)
                if older is not None and not rec.estimate_formed:
                    created.append(self._form(rec, older))
            self._evict_used()
        return created

    def _form(self, later: FeedbackRecord, earlier: FeedbackRecord) -> EstimateRecord:
        coef = (self.dim / later.radius) * (later.value - earlier.value)
        later.usage_count += 1
        earlier.usage_count += 1
        later.estimate_formed = True
        est = EstimateRecord(later.timestamp, coef, later.direction)
        self._push(est)
        return est

    def _ingest_single_point(self, arrivals):
        # prior-art pipeline: every arrival becomes an estimate immediately
        created = []
        for rec in arrivals:
            if rec.timestamp >= 2:
                rec.usage_count += 1
                rec.estimate_formed = True
                est = EstimateRecord(rec.timestamp,
                                     (self.dim / rec.radius) * rec.value,
                                     rec.direction)
                self._push(est)
                created.append(est)
        return created

    def _push(self, est: EstimateRecord):
        if est.timestamp in self._pending:
            raise IntegrityError(
                f"estimate for timestamp {est.timestamp} created twice")
        heapq.heappush(self._heap, est.timestamp)
        self._pending[est.timestamp] = est
        self.estimates_created += 1

    def _evict_used(self):
        used = [t for t, rec in self.value_cache.items()
                if rec.usage_count >= 2]
        for t in used:
            del self.value_cache[t]

    # -- estimate consumption -------------------------------------------------

    def pop_earliest(self) -> EstimateRecord:
        """Remove and return the earliest estimate, or the zero sentinel."""
        if not self._heap:
            return self._sentinel
        t = heapq.heappop(self._heap)
        self.last_consumed = t
        return self._pending.pop(t)

    @property
    def queue_empty(self) -> bool:
        return not self._heap

    @property
    def cache_size(self) -> int:
        return len(self.value_cache)


def starvation_count(history, k: int) -> int:
    """Number of iterations among 1..k whose estimate queue was empty.

    ``history[j]`` is the emptiness flag of iteration ``j + 1``.
    """
    if k < 1 or k > len(history):
        raise ValueError("history must cover iterations 1..k")
    return int(np.count_nonzero(np.asarray(history[:k], dtype=bool)))

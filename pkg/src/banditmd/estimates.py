"""Zeroth-order pseudo-gradient estimates from realized objective values.

A player never sees gradients; it perturbs its action along a random unit
direction inside a ball of the feasible set and reconstructs descent
information from scalar objective values. The residual estimate uses the
difference of two consecutive realized values as a control variate; the
single-point estimate (the prior art this library compares against) uses one
value alone and pays for it with much larger variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import InteriorBall


def sample_unit_sphere(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the unit sphere via a normalized Gaussian vector."""
    if dim < 1:
        raise ValueError("dim must be a positive integer")
    u = rng.standard_normal(dim)
    norm = np.linalg.norm(u)
    while norm == 0.0:  # pragma: no cover - probability ~0
        u = rng.standard_normal(dim)
        norm = np.linalg.norm(u)
    return u / norm


@dataclass(frozen=True)
class PerturbationContext:
    """Ball, query radius, and unit direction for one perturbation step."""

    ball: InteriorBall
    radius: float  # query radius delta_k
    direction: np.ndarray  # unit vector u_k

    def __post_init__(self):
        direction = np.atleast_1d(np.asarray(self.direction, dtype=float))
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "radius", float(self.radius))
        if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")
        if not 0.0 < self.radius <= self.ball.radius:
            raise ValueError("need 0 < query radius <= ball radius for feasibility")


def perturb(x: np.ndarray, ctx: PerturbationContext) -> tuple[np.ndarray, np.ndarray]:
    """Contract ``x`` toward the ball center and step ``delta`` along the direction.

    Returns ``(x_bar, x_hat)`` with
    ``x_bar = (1 - delta/r) x + (delta/r) p`` and ``x_hat = x_bar + delta u``;
    the contraction guarantees ``x_hat`` stays feasible whenever ``x`` is.
    """
    x = np.asarray(x, dtype=float)
    p, r = ctx.ball.center, ctx.ball.radius
    t = ctx.radius / r
    x_bar = (1.0 - t) * x + t * p
    x_hat = x_bar + ctx.radius * ctx.direction
    return x_bar, x_hat


def residual_estimate(j_curr: float, j_prev: float, u: np.ndarray, delta: float,
                      dim: int) -> np.ndarray:
    """Residual pseudo-gradient estimate ``(dim/delta) (J_k - J_{k-1}) u``."""
    if not delta > 0.0:
        raise ValueError("query radius delta must be positive")
    return (dim / delta) * (float(j_curr) - float(j_prev)) * np.asarray(u, dtype=float)


def single_point_estimate(j_curr: float, u: np.ndarray, delta: float,
                          dim: int) -> np.ndarray:
    """Single-point pseudo-gradient estimate ``(dim/delta) J_k u``."""
    if not delta > 0.0:
        raise ValueError("query radius delta must be positive")
    return (dim / delta) * float(j_curr) * np.asarray(u, dtype=float)

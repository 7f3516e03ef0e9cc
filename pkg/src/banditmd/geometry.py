"""Feasible-set geometry, Bregman divergences, and prox-mappings.

Feasible sets are boxes optionally intersected with halfspaces ``a @ x <= b``.
Euclidean projections onto box-plus-halfspace sets use Dykstra's alternating
projection scheme; the same kernel serves single points and whole batches of
player actions so that library calls and the simulation hot loop follow one
code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


DYKSTRA_TOL = 1e-10
DYKSTRA_MAX_ITER = 10_000


class ProjectionError(RuntimeError):
    """Dykstra projection failed to converge; carries the attained residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class FeasibleSet:
    """Bounded box ``lower <= x <= upper`` intersected with halfspaces ``A x <= b``."""

    lower: np.ndarray
    upper: np.ndarray
    halfspace_normals: np.ndarray | None = None  # (m, dim), unnormalized
    halfspace_offsets: np.ndarray | None = None  # (m,)

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape:
            raise ValueError("lower and upper bounds must have the same shape")
        if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
            raise ValueError("box bounds must be finite (the set must be bounded)")
        if not np.all(lower < upper):
            raise ValueError("need lower < upper componentwise (nonempty interior)")
        if (self.halfspace_normals is None) != (self.halfspace_offsets is None):
            raise ValueError("halfspace normals and offsets must be given together")
        if self.halfspace_normals is not None:
            normals = np.atleast_2d(np.asarray(self.halfspace_normals, dtype=float))
            offsets = np.atleast_1d(np.asarray(self.halfspace_offsets, dtype=float))
            if normals.shape != (offsets.size, lower.size):
                raise ValueError("halfspace normals must be (m, dim), offsets (m,)")
            if np.any(np.linalg.norm(normals, axis=1) == 0.0):
                raise ValueError("halfspace normals must be nonzero")
            object.__setattr__(self, "halfspace_normals", normals)
            object.__setattr__(self, "halfspace_offsets", offsets)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def n_halfspaces(self) -> int:
        return 0 if self.halfspace_normals is None else self.halfspace_normals.shape[0]

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint violation at ``x`` (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        v = max(float(np.max(self.lower - x, initial=0.0)),
                float(np.max(x - self.upper, initial=0.0)))
        if self.halfspace_normals is not None:
            v = max(v, float(np.max(self.halfspace_normals @ x - self.halfspace_offsets,
                                    initial=0.0)))
        return max(v, 0.0)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return self.violation(x) <= tol


@dataclass(frozen=True)
class InteriorBall:
    """Euclidean ball ``B(center, radius)`` expected to sit inside a feasible set."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0.0:
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True)
class MirrorStructure:
    """Distance-generating function choice with its strong-convexity modulus."""

    kind: str = "euclidean"  # "euclidean" or "entropic"
    modulus: float = 1.0

    def __post_init__(self):
        if self.kind not in ("euclidean", "entropic"):
            raise ValueError(f"unknown DGF kind {self.kind!r}")
        if not self.modulus > 0.0:
            raise ValueError("strong-convexity modulus must be positive")


EUCLIDEAN = MirrorStructure("euclidean", 1.0)


def verify_interior_ball(fset: FeasibleSet, ball: InteriorBall) -> bool:
    """True iff ``B(center, radius)`` is certified inside the set.

    Box faces need a margin of ``radius``; each halfspace needs
    ``a @ p + radius * ||a||_2 <= b``.
    """
    p, r = ball.center, ball.radius
    if p.size != fset.dim:
        return False
    if np.any(p - r < fset.lower) or np.any(p + r > fset.upper):
        return False
    if fset.halfspace_normals is not None:
        norms = np.linalg.norm(fset.halfspace_normals, axis=1)
        if np.any(fset.halfspace_normals @ p + r * norms > fset.halfspace_offsets):
            return False
    return True


def shrink_interior_ball(fset: FeasibleSet, center: np.ndarray | None = None,
                         max_shrinks: int = 50) -> InteriorBall:
    """Build a verified interior ball by shrinking the radius at a given center.

    Defaults to the box center projected into the set. Fails after
    ``max_shrinks`` halvings, which signals an (almost) empty interior.
    """
    if center is None:
        center = project_polytope(fset, 0.5 * (fset.lower + fset.upper))
    center = np.asarray(center, dtype=float)
    radius = float(np.min(fset.upper - fset.lower)) / 2.0
    for _ in range(max_shrinks):
        ball = InteriorBall(center, radius)
        if verify_interior_ball(fset, ball):
            return ball
        radius *= 0.5
    raise ValueError("could not verify an interior ball; the set may have empty interior")


# --- Bregman divergence -----------------------------------------------------

def bregman(structure: MirrorStructure, p: np.ndarray, x: np.ndarray) -> float:
    """Bregman divergence D(p, x) = psi(p) - psi(x) - <grad psi(x), p - x>."""
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    if p.shape != x.shape:
        raise ValueError("p and x must have the same shape")
    if structure.kind == "euclidean":
        d = p - x
        return 0.5 * float(d @ d)
    # entropic: psi(x) = sum x log x on the positive orthant
    if np.any(p <= 0.0) or np.any(x <= 0.0):
        raise ValueError("entropic divergence needs strictly positive entries")
    return float(np.sum(p * np.log(p / x)) - np.sum(p) + np.sum(x))


# --- Dykstra projection ------------------------------------------------------

def _dykstra_batch_impl(Z, lower, upper, normals, offsets, norms_sq, tol, max_iter):
    """Dykstra alternating projections, one independent problem per row of Z.

    Cycles through the box and every halfspace, carrying one correction term
    per constraint. Stops when a full cycle moves the iterate less than
    ``tol`` in the max norm and the constraint violation is below ``10 * tol``.
    Returns (X, residuals) where a negative residual marks convergence.
    ``normals`` has shape (n_rows, m, dim): each row owns its constraints.
    """
    n_rows, dim = Z.shape
    m = normals.shape[1]
    X = Z.copy()
    out_res = np.empty(n_rows)
    for row in range(n_rows):
        x = X[row]
        corr = np.zeros((m + 1, dim))
        resid = np.inf
        for _ in range(max_iter):
            change = 0.0
            # constraint 0: the box
            for j in range(dim):
                v = x[j] - corr[0, j]
                w = min(max(v, lower[row, j]), upper[row, j])
                corr[0, j] = w - v
                d = w - x[j]
                if d < 0.0:
                    d = -d
                if d > change:
                    change = d
                x[j] = w
            # halfspaces
            for c in range(m):
                v_dot = 0.0
                for j in range(dim):
                    v_dot += normals[row, c, j] * (x[j] - corr[c + 1, j])
                excess = v_dot - offsets[row, c]
                if excess > 0.0:
                    scale = excess / norms_sq[row, c]
                else:
                    scale = 0.0
                for j in range(dim):
                    v = x[j] - corr[c + 1, j]
                    w = v - scale * normals[row, c, j]
                    corr[c + 1, j] = w - v
                    d = w - x[j]
                    if d < 0.0:
                        d = -d
                    if d > change:
                        change = d
                    x[j] = w
            # violation at the current iterate
            viol = 0.0
            for j in range(dim):
                if lower[row, j] - x[j] > viol:
                    viol = lower[row, j] - x[j]
                if x[j] - upper[row, j] > viol:
                    viol = x[j] - upper[row, j]
            for c in range(m):
                v_dot = 0.0
                for j in range(dim):
                    v_dot += normals[row, c, j] * x[j]
                if v_dot - offsets[row, c] > viol:
                    viol = v_dot - offsets[row, c]
            resid = change if change > viol else viol
            if change < tol and viol <= 10.0 * tol:
                resid = -1.0
                break
        out_res[row] = resid
    return X, out_res


_dykstra_batch = njit(cache=True)(_dykstra_batch_impl) if _HAVE_NUMBA else _dykstra_batch_impl


def project_polytope(fset: FeasibleSet, z: np.ndarray, tol: float = DYKSTRA_TOL,
                     max_iter: int = DYKSTRA_MAX_ITER) -> np.ndarray:
    """Euclidean projection of ``z`` onto the box-plus-halfspace set.

    Points already in the set are returned unchanged (exact fixed point).
    Raises :class:`ProjectionError` when the iteration cap is exhausted.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    z = np.asarray(z, dtype=float)
    if fset.contains(z, tol=0.0):
        return z.copy()
    if fset.n_halfspaces == 0:
        return np.clip(z, fset.lower, fset.upper)
    normals = fset.halfspace_normals[None, :, :]
    X, res = _dykstra_batch(
        z[None, :].copy(),
        fset.lower[None, :], fset.upper[None, :],
        normals, fset.halfspace_offsets[None, :],
        np.einsum("rij,rij->ri", normals, normals),
        tol, max_iter,
    )
    if res[0] >= 0.0:
        raise ProjectionError("Dykstra projection did not converge", float(res[0]))
    return X[0]


def project_box_halfspaces_batch(Z: np.ndarray, lower: np.ndarray, upper: np.ndarray,
                                 normals: np.ndarray, offsets: np.ndarray,
                                 tol: float = DYKSTRA_TOL,
                                 max_iter: int = DYKSTRA_MAX_ITER) -> np.ndarray:
    """Row-wise projection for a batch of same-dimension player polytopes.

    ``Z``: (n_rows, dim) targets; ``lower``/``upper``: (n_rows, dim);
    ``normals``: (n_rows, m, dim); ``offsets``: (n_rows, m). Used by the
    simulation hot loop; single points go through :func:`project_polytope`,
    which calls the same kernel.
    """
    X, res = _dykstra_batch(Z.copy(), lower, upper, normals, offsets,
                            np.einsum("rij,rij->ri", normals, normals),
                            tol, max_iter)
    worst = float(np.max(res))
    if worst >= 0.0:
        raise ProjectionError("Dykstra projection did not converge", worst)
    return X


class BlockProjector:
    """Euclidean projection onto a product of per-player feasible sets.

    Picks the cheapest strategy the structure allows: one global clip when
    every set is a pure box, the batched Dykstra kernel when all players share
    the action dimension and halfspace count, and a per-player loop otherwise.
    All strategies produce bit-identical results to per-player
    :func:`project_polytope` calls.
    """

    def __init__(self, sets: list[FeasibleSet], tol: float = DYKSTRA_TOL,
                 max_iter: int = DYKSTRA_MAX_ITER):
        self.sets = list(sets)
        self.tol = tol
        self.max_iter = max_iter
        dims = [s.dim for s in self.sets]
        self.offsets_flat = np.concatenate([[0], np.cumsum(dims)])
        self.total_dim = int(self.offsets_flat[-1])
        self.block_slices = [slice(int(a), int(b))
                             for a, b in zip(self.offsets_flat[:-1], self.offsets_flat[1:])]
        if all(s.n_halfspaces == 0 for s in self.sets):
            self.strategy = "box"
            self._lo = np.concatenate([s.lower for s in self.sets])
            self._hi = np.concatenate([s.upper for s in self.sets])
        elif len(set(dims)) == 1 and len({s.n_halfspaces for s in self.sets}) == 1:
            self.strategy = "batch"
            self._lo2d = np.stack([s.lower for s in self.sets])
            self._hi2d = np.stack([s.upper for s in self.sets])
            self._A = np.stack([
                s.halfspace_normals if s.halfspace_normals is not None
                else np.zeros((0, s.dim)) for s in self.sets])
            self._b2d = np.stack([
                s.halfspace_offsets if s.halfspace_offsets is not None
                else np.zeros(0) for s in self.sets])
            self._norms_sq = np.einsum("rij,rij->ri", self._A, self._A)
        else:
            self.strategy = "loop"

    def __call__(self, z_flat: np.ndarray) -> np.ndarray:
        if self.strategy == "box":
            return np.clip(z_flat, self._lo, self._hi)
        if self.strategy == "batch":
            Z = z_flat.reshape(len(self.sets), -1)
            viol = np.maximum((self._lo2d - Z).max(axis=1), (Z - self._hi2d).max(axis=1))
            if self._A.shape[1] > 0:
                hv = np.einsum("rmj,rj->rm", self._A, Z) - self._b2d
                viol = np.maximum(viol, hv.max(axis=1))
            rows_ok = viol <= 0.0
            if rows_ok.all():
                return z_flat.copy()
            X = Z.copy()
            Xp, res = _dykstra_batch(Z[~rows_ok].copy(), self._lo2d[~rows_ok],
                                     self._hi2d[~rows_ok], self._A[~rows_ok],
                                     self._b2d[~rows_ok], self._norms_sq[~rows_ok],
                                     self.tol, self.max_iter)
            worst = float(np.max(res))
            if worst >= 0.0:
                raise ProjectionError("Dykstra projection did not converge", worst)
            X[~rows_ok] = Xp
            return X.reshape(-1)
        out = np.empty_like(z_flat)
        for sl, fset in zip(self.block_slices, self.sets):
            out[sl] = project_polytope(fset, z_flat[sl], tol=self.tol,
                                       max_iter=self.max_iter)
        return out


# --- Prox-mapping ------------------------------------------------------------

def prox_step(structure: MirrorStructure, fset: FeasibleSet, x: np.ndarray,
              y: np.ndarray, tol: float = DYKSTRA_TOL,
              max_iter: int = DYKSTRA_MAX_ITER) -> np.ndarray:
    """Prox-mapping taking the pre-scaled dual step ``y`` from ``x``.

    Euclidean structure reduces to the Euclidean projection of ``x - y`` onto
    the set; entropic structure (simplex sets) is the multiplicative-weights
    update ``x * exp(-y)`` renormalized.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if structure.kind == "euclidean":
        return project_polytope(fset, x - y, tol=tol, max_iter=max_iter)
    if np.any(x <= 0.0):
        raise ValueError("entropic prox needs strictly positive x")
    w = x * np.exp(-(y - np.min(y)))
    return w / np.sum(w)

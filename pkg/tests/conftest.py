import numpy as np
import pytest

import banditmd as bm

# filled by the acceptance suite; echoed after the run regardless of capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def quad_game():
    return bm.random_quadratic_game(3, 2, seed=42)


@pytest.fixture(scope="session")
def quad_star(quad_game):
    return bm.solve_critical_point(quad_game, tol=1e-11)


@pytest.fixture(scope="session")
def thermal_game():
    return bm.default_thermal_game()


@pytest.fixture(scope="session")
def thermal_star(thermal_game):
    x_star = bm.solve_critical_point(thermal_game)
    return x_star, thermal_game.potential(x_star)


def random_polytope_2d(rng, n_halfspaces=None):
    """Random 2-D box-with-halfspaces instance that keeps the center feasible."""
    lo = rng.uniform(-0.2, 0.0, size=2)
    hi = rng.uniform(1.0, 1.2, size=2)
    center = 0.5 * (lo + hi)
    m = int(rng.integers(1, 4)) if n_halfspaces is None else n_halfspaces
    normals, offsets = [], []
    for _ in range(m):
        a = rng.normal(size=2)
        a /= np.linalg.norm(a)
        slack = rng.uniform(0.15, 0.6)
        normals.append(a)
        offsets.append(float(a @ center) + slack)
    return bm.FeasibleSet(lo, hi, np.array(normals), np.array(offsets))


def enumeration_projection(fset, z, tol=1e-9):
    """Exact polytope projection by enumerating candidate active sets.

    Collects every constraint as a halfspace row, projects ``z`` onto the
    affine hull of each subset of at most ``dim`` constraints, and returns the
    feasible candidate closest to ``z``. Independent of Dykstra.
    """
    from itertools import combinations

    z = np.asarray(z, dtype=float)
    dim = fset.dim
    rows, offs = [], []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        rows.append(-e)
        offs.append(-fset.lower[j])
        rows.append(e)
        offs.append(fset.upper[j])
    if fset.halfspace_normals is not None:
        rows.extend(fset.halfspace_normals)
        offs.extend(fset.halfspace_offsets)
    rows = np.array(rows)
    offs = np.array(offs)
    best, best_d = None, np.inf
    if fset.contains(z, tol=tol):
        return z.copy()
    for size in range(1, dim + 1):
        for subset in combinations(range(len(rows)), size):
            A = rows[list(subset)]
            b = offs[list(subset)]
            gram = A @ A.T
            if abs(np.linalg.det(gram)) < 1e-12:
                continue
            lam = np.linalg.solve(gram, A @ z - b)
            cand = z - A.T @ lam
            if fset.contains(cand, tol=tol):
                d = float(np.linalg.norm(cand - z))
                if d < best_d:
                    best, best_d = cand, d
    assert best is not None, "no feasible candidate; degenerate instance"
    return best

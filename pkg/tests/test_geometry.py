import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import banditmd as bm
from banditmd.geometry import EUCLIDEAN, MirrorStructure

from conftest import enumeration_projection, random_polytope_2d

ENTROPIC = MirrorStructure("entropic", 1.0)


class TestBregman:
    def test_euclidean_identity(self):
        p = np.array([0.3, 0.7])
        assert bm.bregman(EUCLIDEAN, p, p) == 0.0

    def test_euclidean_hand_value(self):
        assert bm.bregman(EUCLIDEAN, np.ones(2), np.zeros(2)) == pytest.approx(1.0)

    def test_entropic_identity(self):
        p = np.array([0.2, 0.5, 0.3])
        assert bm.bregman(ENTROPIC, p, p) == pytest.approx(0.0, abs=1e-15)

    def test_entropic_domain_violation(self):
        with pytest.raises(ValueError):
            bm.bregman(ENTROPIC, np.array([0.0, 1.0]), np.array([0.5, 0.5]))

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_lower_bound_by_norm(self, seed):
        rng = np.random.default_rng(seed)
        p, x = rng.normal(size=3), rng.normal(size=3)
        d = bm.bregman(EUCLIDEAN, p, x)
        assert d == pytest.approx(0.5 * np.sum((p - x) ** 2))
        assert d >= 0.5 * np.sum((p - x) ** 2) - 1e-12

    @pytest.mark.parametrize("structure", [EUCLIDEAN, ENTROPIC])
    def test_reciprocity_along_contracting_sequence(self, structure):
        rng = np.random.default_rng(7)
        p = rng.uniform(0.2, 0.8, size=4)
        p /= p.sum()
        x0 = rng.uniform(0.2, 0.8, size=4)
        x0 /= x0.sum()
        vals = []
        for k in range(1, 40):
            xk = p + (x0 - p) * 0.5**k
            vals.append(bm.bregman(structure, p, xk))
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-8


class TestProx:
    def test_zero_step_is_identity(self):
        box = bm.FeasibleSet([0.0, 0.0], [1.0, 1.0])
        x = np.array([0.5, 0.5])
        out = bm.prox_step(EUCLIDEAN, box, x, np.zeros(2))
        assert np.array_equal(out, x)

    def test_hand_projection_on_box(self):
        box = bm.FeasibleSet([0.0, 0.0], [1.0, 1.0])
        out = bm.prox_step(EUCLIDEAN, box, np.array([0.5, 0.5]),
                           np.array([1.0, -1.0]))
        assert np.allclose(out, [0.0, 1.0])

    def test_matches_enumeration_oracle_on_polytope(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            fset = random_polytope_2d(rng)
            x = 0.5 * (fset.lower + fset.upper)
            y = rng.normal(scale=1.2, size=2)
            got = bm.prox_step(EUCLIDEAN, fset, x, y)
            want = enumeration_projection(fset, x - y)
            assert np.linalg.norm(got - want) < 1e-4

    def test_output_always_feasible(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            fset = random_polytope_2d(rng)
            x = 0.5 * (fset.lower + fset.upper)
            y = rng.normal(scale=2.0, size=2)
            out = bm.prox_step(EUCLIDEAN, fset, x, y)
            assert fset.violation(out) <= 1e-9

    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_mirror_map_lipschitz_on_boxes(self, seed):
        rng = np.random.default_rng(seed)
        lo = rng.uniform(-1.0, 0.0, size=3)
        hi = rng.uniform(0.5, 1.5, size=3)
        box = bm.FeasibleSet(lo, hi)
        x = rng.uniform(lo, hi)
        y1, y2 = rng.normal(size=3), rng.normal(size=3)
        p1 = bm.prox_step(EUCLIDEAN, box, x, y1)
        p2 = bm.prox_step(EUCLIDEAN, box, x, y2)
        assert np.linalg.norm(p1 - p2) <= np.linalg.norm(y1 - y2) + 1e-12

    def test_agrees_with_project_polytope(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            fset = random_polytope_2d(rng)
            x = 0.5 * (fset.lower + fset.upper)
            y = rng.normal(size=2)
            a = bm.prox_step(EUCLIDEAN, fset, x, y)
            b = bm.project_polytope(fset, x - y)
            assert np.linalg.norm(a - b) < 1e-9

    def test_entropic_multiplicative_weights(self):
        simplex_box = bm.FeasibleSet([0.0, 0.0], [1.0, 1.0])
        x = np.array([0.5, 0.5])
        y = np.array([np.log(2.0), 0.0])
        out = bm.prox_step(ENTROPIC, simplex_box, x, y)
        assert np.allclose(out, [1.0 / 3.0, 2.0 / 3.0])
        assert out.sum() == pytest.approx(1.0)


class TestProjectPolytope:
    def test_fixed_point_inside(self):
        fset = bm.FeasibleSet([0.0, 0.0], [1.0, 1.0],
                              np.array([[1.0, 1.0]]), np.array([1.5]))
        z = np.array([0.25, 0.5])
        assert np.array_equal(bm.project_polytope(fset, z), z)

    def test_symmetric_halfspace_cut(self):
        fset = bm.FeasibleSet([0.0, 0.0], [1.0, 1.0],
                              np.array([[1.0, 1.0]]), np.array([1.0]))
        out = bm.project_polytope(fset, np.array([1.0, 1.0]))
        assert np.allclose(out, [0.5, 0.5], atol=1e-9)

    def test_matches_enumeration_on_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            fset = random_polytope_2d(rng)
            z = rng.uniform(-0.5, 1.7, size=2)
            got = bm.project_polytope(fset, z)
            want = enumeration_projection(fset, z)
            assert np.linalg.norm(got - want) < 1e-6

    def test_distance_matches_dense_grid(self):
        # the grid argmin direction is only O(sqrt(d*h)) accurate, but the
        # attained distance is O(d*h) accurate, which 1e-3 comfortably covers
        rng = np.random.default_rng(23)
        for _ in range(10):
            fset = random_polytope_2d(rng, n_halfspaces=2)
            z = rng.uniform(-0.3, 1.5, size=2)
            got = bm.project_polytope(fset, z)
            xs = np.linspace(fset.lower[0], fset.upper[0], 1200)
            ys = np.linspace(fset.lower[1], fset.upper[1], 1200)
            G = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
            feas = np.all(G @ fset.halfspace_normals.T
                          <= fset.halfspace_offsets[None, :], axis=1)
            dists = np.linalg.norm(G[feas] - z, axis=1)
            assert abs(np.linalg.norm(got - z) - dists.min()) < 1e-3

    def test_iteration_cap_raises_with_residual(self):
        fset = bm.FeasibleSet([0.0, 0.0], [1.0, 1.0],
                              np.array([[1.0, 1.0]]), np.array([1.0]))
        with pytest.raises(bm.ProjectionError) as err:
            bm.project_polytope(fset, np.array([5.0, 5.0]), tol=1e-14, max_iter=1)
        assert err.value.residual > 0.0

    def test_rejects_nonpositive_tol(self):
        fset = bm.FeasibleSet([0.0], [1.0])
        with pytest.raises(ValueError):
            bm.project_polytope(fset, np.array([2.0]), tol=0.0)


class TestInteriorBall:
    def test_maximal_centered_ball(self):
        fset = bm.FeasibleSet([0.0], [1.0])
        assert bm.verify_interior_ball(fset, bm.InteriorBall([0.5], 0.5))

    def test_radius_exceeding_margin(self):
        fset = bm.FeasibleSet([0.0], [1.0])
        assert not bm.verify_interior_ball(fset, bm.InteriorBall([0.5], 0.6))

    def test_halfspace_certificate(self):
        fset = bm.FeasibleSet([0.0, 0.0], [1.0, 1.0],
                              np.array([[1.0, 1.0]]), np.array([1.0]))
        assert bm.verify_interior_ball(fset, bm.InteriorBall([0.29, 0.29], 0.29))
        assert not bm.verify_interior_ball(fset, bm.InteriorBall([0.3, 0.3], 0.3))

    def test_shrink_helper_returns_verified_ball(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            fset = random_polytope_2d(rng)
            ball = bm.shrink_interior_ball(fset)
            assert bm.verify_interior_ball(fset, ball)


class TestFeasibleSetValidation:
    def test_rejects_empty_interior(self):
        with pytest.raises(ValueError):
            bm.FeasibleSet([0.0, 1.0], [1.0, 1.0])

    def test_rejects_unbounded_box(self):
        with pytest.raises(ValueError):
            bm.FeasibleSet([0.0], [np.inf])

    def test_rejects_mismatched_halfspaces(self):
        with pytest.raises(ValueError):
            bm.FeasibleSet([0.0, 0.0], [1.0, 1.0], np.array([[1.0, 0.0]]), None)


class TestBlockProjector:
    def test_strategies_agree(self):
        rng = np.random.default_rng(13)
        sets = [random_polytope_2d(rng, n_halfspaces=2) for _ in range(4)]
        proj = bm.BlockProjector(sets)
        assert proj.strategy == "batch"
        z = rng.normal(scale=1.5, size=8)
        batch = proj(z)
        for i, (sl, fset) in enumerate(zip(proj.block_slices, sets)):
            single = bm.project_polytope(fset, z[sl])
            assert np.array_equal(batch[sl], single), f"block {i} differs"

    def test_box_strategy_is_clip(self):
        sets = [bm.FeasibleSet([0.0, 0.0], [1.0, 1.0]) for _ in range(3)]
        proj = bm.BlockProjector(sets)
        assert proj.strategy == "box"
        z = np.array([-1.0, 0.5, 2.0, 0.25, 0.75, 1.5])
        assert np.array_equal(proj(z), np.clip(z, 0.0, 1.0))

    def test_mixed_dims_fall_back_to_loop(self):
        sets = [bm.FeasibleSet([0.0], [1.0]),
                bm.FeasibleSet([0.0, 0.0], [1.0, 1.0],
                               np.array([[1.0, 1.0]]), np.array([1.0]))]
        proj = bm.BlockProjector(sets)
        assert proj.strategy == "loop"
        z = np.array([2.0, 1.0, 1.0])
        out = proj(z)
        assert np.allclose(out, [1.0, 0.5, 0.5], atol=1e-9)

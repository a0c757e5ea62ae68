import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import central_difference_jacobian, noiseless_instance
from specband.mapest import (
    MapProblem,
    SingularDesign,
    amplitude_ls,
    box_projected_ls,
    build_design,
    decaying_ridge,
    gradient_matrix,
    map_refine,
)


class TestDesign:
    def test_quarter_period(self):
        V = build_design([np.pi / 2], 4).V
        np.testing.assert_allclose(V[:, 0], [0, -1, 0, 1], atol=1e-15)
        np.testing.assert_allclose(V[:, 1], [1, 0, -1, 0], atol=1e-15)

    def test_rank(self):
        assert np.linalg.matrix_rank(build_design([0.8, 1.9], 100).V) == 4

    def test_near_zero_frequency(self):
        d = build_design([1e-10], 10, check=False)
        np.testing.assert_allclose(d.V[:, 0], 1.0)
        assert d.near_degenerate

    def test_duplicates(self):
        with pytest.raises(SingularDesign):
            build_design([1.0, 1.0], 20)

    def test_bounded_columns(self):
        V = build_design([0.3, 1.1, 2.9], 57).V
        assert np.abs(V).max() <= 1.0


class TestAmplitudes:
    def test_consistent_system(self):
        V = build_design([0.5, 2.0], 60).V
        u = np.array([1.0, -0.5, 0.3, 2.0])
        np.testing.assert_allclose(amplitude_ls(V, V @ u), u, atol=1e-10)

    def test_orthogonal_data(self):
        V = build_design([0.5, 2.0], 60).V
        y = np.random.default_rng(0).normal(size=60)
        y -= V @ np.linalg.lstsq(V, y, rcond=None)[0]
        np.testing.assert_allclose(amplitude_ls(V, y), 0.0, atol=1e-12)

    def test_multi_snapshot_columns(self):
        V = build_design([0.5, 2.0], 60).V
        U = np.random.default_rng(1).normal(size=(4, 7))
        np.testing.assert_allclose(amplitude_ls(V, V @ U), U, atol=1e-10)

    def test_mean_amplitude_variance_shrinks(self):
        # averaging the per-snapshot fits of a common u: variance ~ 1/L
        rng = np.random.default_rng(2)
        V = build_design([0.7], 40).V
        u = np.array([1.0, -1.0])

        def spread(L):
            means = [amplitude_ls(V, (V @ u)[:, None] + rng.normal(0, 1, (40, L))).mean(axis=1) for _ in range(200)]
            return np.var(means, axis=0).mean()

        assert spread(64) == pytest.approx(spread(16) / 4, rel=0.35)

    def test_singular(self):
        V = np.ones((10, 2))
        with pytest.raises(SingularDesign, match="cond"):
            amplitude_ls(V, np.ones(10))


class TestGradient:
    def test_single_frequency_formula(self):
        t = np.arange(1, 21)
        M = gradient_matrix([0.9], [1.0, 0.0], 20)
        np.testing.assert_allclose(M[:, 0], -t * np.sin(0.9 * t))

    def test_zero_amplitudes(self):
        np.testing.assert_array_equal(gradient_matrix([0.4, 1.2], np.zeros(4), 30), np.zeros((30, 2)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            gradient_matrix([0.4, 1.2], np.zeros(3), 30)

    def test_stacked_snapshots(self):
        U = np.random.default_rng(3).normal(size=(4, 5))
        G = gradient_matrix([0.4, 1.2], U, 30)
        assert G.shape == (5, 30, 2)
        np.testing.assert_allclose(G[2], gradient_matrix([0.4, 1.2], U[:, 2], 30))

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**31), nu=st.integers(1, 3), N=st.integers(2, 200))
    def test_finite_differences(self, seed, nu, N):
        rng = np.random.default_rng(seed)
        theta = rng.uniform(0.1, np.pi - 0.1, nu)
        u = rng.normal(size=2 * nu)
        M = gradient_matrix(theta, u, N)
        fd = central_difference_jacobian(theta, u, N)
        assert np.max(np.abs(M - fd)) <= 1e-4 * np.max(np.abs(M))


class TestBoxLs:
    def test_interior(self):
        rng = np.random.default_rng(4)
        M = rng.normal(size=(30, 2))
        x0 = np.array([0.1, -0.2])
        np.testing.assert_allclose(box_projected_ls(M, M @ x0, 1.0), x0, atol=1e-10)

    def test_one_dimensional_clamp(self):
        M = np.arange(1.0, 6.0)
        np.testing.assert_allclose(box_projected_ls(M, 3 * 0.2 * M, 0.2), [0.2])
        np.testing.assert_allclose(box_projected_ls(M, -3 * 0.2 * M, 0.2), [-0.2])

    def test_ridge_shrinks(self):
        M = np.eye(3)
        np.testing.assert_allclose(box_projected_ls(M, [0.5, 0.5, 0.5], 10.0, lam=1.0), [0.25] * 3)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31), lam=st.sampled_from([0.0, 0.5]))
    def test_random_search_oracle(self, seed, lam):
        rng = np.random.default_rng(seed)
        M = rng.normal(size=(12, 2))
        r = rng.normal(size=12) * 3
        W = rng.uniform(0.05, 1.0)

        def f(x):
            return np.sum((r - M @ x) ** 2) + lam * np.sum(x * x, axis=0)

        x = box_projected_ls(M, r, W, lam)
        assert np.all(np.abs(x) <= W)
        pts = rng.uniform(-W, W, size=(2, 10_000))
        fx = np.sum((r[:, None] - M @ pts) ** 2, axis=0) + lam * np.sum(pts * pts, axis=0)
        assert f(x) <= fx.min() + 1e-10


class TestProblem:
    def test_validation(self):
        with pytest.raises(ValueError):
            MapProblem(np.zeros(5), [1.0], 0.0)
        with pytest.raises(ValueError):
            MapProblem(np.zeros(5), [1.0], 0.1, tol=0)
        with pytest.raises(ValueError):
            MapProblem(np.zeros(5), [1.0], 0.1, ridge_schedule=[0.1, 0.2])
        with pytest.raises(ValueError):
            MapProblem(np.zeros(5), [1.0], 0.1, ridge_schedule=[-1.0])

    def test_schedules(self):
        p = MapProblem(np.zeros(5), [1.0], 0.1, ridge_schedule=[0.3, 0.1])
        assert [p.ridge(k, None) for k in range(3)] == [0.3, 0.1, 0.1]
        sched = decaying_ridge()
        MtM = np.diag([4.0, 1.0])
        assert sched(0, MtM) == pytest.approx(0.04)
        assert sched(3, MtM) == pytest.approx(0.01)


class TestMapRefine:
    def test_already_at_truth(self):
        N, th = 80, np.array([1.1])
        y = build_design(th, N).V @ np.array([0.7, -0.4])
        res = map_refine(MapProblem(y, th, 0.02))
        assert res.converged and res.iterations == 1
        np.testing.assert_array_equal(res.omega_map, th)

    def test_recovers_offset_truth(self):
        N, th, W = 100, np.array([1.0]), 0.02
        om = th + 0.4 * W
        y = build_design(om, N).V @ np.array([1.0, 0.5])
        res = map_refine(MapProblem(y, th, W))
        assert res.converged
        assert abs(res.omega_map[0] - om[0]) < 1e-6

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_noiseless_residual(self, seed):
        y, th, W, om = noiseless_instance(np.random.default_rng(seed))
        res = map_refine(MapProblem(y, th, W))
        V = build_design(res.omega_map, y.size, check=False).V
        resid = y - V @ amplitude_ls(V, y)
        assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(y)
        assert np.max(np.abs(res.omega_map - om)) < 1e-6

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31), ridge=st.booleans())
    def test_feasible_and_monotone(self, seed, ridge):
        rng = np.random.default_rng(seed)
        y, th, W, _ = noiseless_instance(rng)
        y = y + rng.normal(0, 0.5, y.size)
        start = th + rng.uniform(-1, 1, th.size) * W  # start anywhere in its own box
        res = map_refine(MapProblem(y, start, W, ridge_schedule=decaying_ridge() if ridge else None))
        assert np.all((start - W <= res.omega_map) & (res.omega_map <= start + W))
        assert np.all(np.diff(res.objective_trace) <= 1e-12 * res.objective_trace[0])

    def test_multi_snapshot_frobenius(self):
        rng = np.random.default_rng(6)
        N, th = 60, np.array([0.8, 2.0])
        om = th + np.array([0.01, -0.015])
        U = rng.normal(size=(4, 6))
        Y = build_design(om, N).V @ U
        res = map_refine(MapProblem(Y, th, 0.03))
        np.testing.assert_allclose(res.omega_map, om, atol=1e-7)
        assert res.u_hat.shape == (4, 6)

    def test_from_panel_transposes(self):
        Y = np.random.default_rng(7).normal(size=(3, 25))
        assert MapProblem.from_panel(Y, [1.0], 0.1).y.shape == (25, 3)

    def test_frozen_amplitudes(self):
        N, th, W = 100, np.array([1.0]), 0.02
        y = build_design(th + 0.3 * W, N).V @ np.array([1.0, 0.5])
        frozen = map_refine(MapProblem(y, th, W, reestimate_amplitudes=False))
        free = map_refine(MapProblem(y, th, W))
        assert np.all(np.abs(frozen.omega_map - th) <= W)
        assert free.objective_trace[-1] <= frozen.objective_trace[-1] + 1e-12

    def test_max_iters_flag(self):
        rng = np.random.default_rng(8)
        y = rng.normal(size=100)
        res = map_refine(MapProblem(y, [1.0, 2.0], 0.05, max_iters=1, tol=1e-300))
        assert not res.converged and "max_iters" in res.flags
        assert res.to_dict()["iterations"] == 1

    def test_ridge_bump_flag(self):
        # zero data makes u = 0, so M = 0 and M^T M is singular
        res = map_refine(MapProblem(np.zeros(30), [1.0, 2.0], 0.05))
        assert "ridge_bump" in res.flags and res.converged

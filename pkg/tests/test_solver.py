"""投影、线搜索与 PG / FPG 求解器。"""

import math

import numpy as np
import pytest

from src.config.schemas import InitMode, SolverConfig, StopOn
from src.errors import DomainError
from src.optim.line_search import BacktrackingLineSearch, model_gap
from src.optim.objective import DecisionPoint, SmoothedObjective
from src.optim.report import TRACE_HEADER, StopReason
from src.optim.solver import (
    ImprovementWindow,
    as_channel,
    backtracking_stepsize,
    initial_point,
    next_beta,
    pg_step,
    project,
    solve,
    solve_fpg,
    solve_pg,
)
from src.phy.channel import Channel, is_constant_envelope, lift, rayleigh_channel, stack_real
from src.phy.constellation import make_constellation
from src.precoders.baselines import ce_zf_precode


class QuadraticToy:
    """f(z) = (Λ/2)·‖z‖²，梯度 Lipschitz 常数为 Λ。"""

    def __init__(self, lipschitz: float):
        self.lipschitz = lipschitz

    def value(self, z: DecisionPoint) -> float:
        return 0.5 * self.lipschitz * (z.d**2 + float(np.sum(z.Xbar**2)))

    def value_and_gradient(self, z: DecisionPoint):
        return self.value(z), self.lipschitz * z.d, self.lipschitz * z.Xbar


def _identity_projection(d, X):
    return DecisionPoint(d, X)


def _random_problem(rng, N=8, K=2, T=4, sigma=0.05):
    channel = rayleigh_channel(K, N, rng)
    S = make_constellation(2).sample((K, T), rng)
    return channel, stack_real(S), SmoothedObjective(lift(channel), stack_real(S), sigma)


class TestProject:

    def test_pair_normalization(self):
        X = np.array([[3.0], [0.0], [4.0], [1.0]])
        z = project(0.5, X, 1.0)
        np.testing.assert_allclose([z.Xbar[0, 0], z.Xbar[2, 0]], [0.42426407, 0.56568542], atol=1e-8)
        np.testing.assert_allclose([z.Xbar[1, 0], z.Xbar[3, 0]], [0.0, math.sqrt(0.5)], atol=1e-15)

    def test_negative_gain_clipped(self):
        assert project(-0.3, np.ones((4, 1)), 1.0).d == 0.0

    def test_zero_pair_uses_phase_zero(self):
        z = project(1.0, np.zeros((4, 2)), 2.0)
        np.testing.assert_array_equal(z.Xbar[:2], np.ones((2, 2)))
        np.testing.assert_array_equal(z.Xbar[2:], np.zeros((2, 2)))

    def test_idempotent(self, rng):
        z = project(0.7, rng.standard_normal((10, 3)), 3.0)
        again = project(z.d, z.Xbar, 3.0)
        assert again.d == z.d
        np.testing.assert_allclose(again.Xbar, z.Xbar, rtol=0, atol=1e-15)

    def test_feasible_output(self, rng):
        assert is_constant_envelope(project(0.0, rng.standard_normal((16, 5)), 1.5).Xbar, 1.5)

    def test_nearest_point_against_angle_grid(self, rng):
        N, P = 4, 1.0
        amplitude = math.sqrt(P / N)
        angles = np.linspace(0.0, 2 * np.pi, 10_000, endpoint=False)
        grid = amplitude * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        resolution = amplitude * 2 * np.pi / len(angles)
        X = 2.0 * rng.standard_normal((2 * N, 25))
        z = project(0.0, X, P)
        for t in range(X.shape[1]):
            for j in range(N):
                v = np.array([X[j, t], X[j + N, t]])
                closed = np.linalg.norm(v - np.array([z.Xbar[j, t], z.Xbar[j + N, t]]))
                best = np.min(np.linalg.norm(grid - v, axis=1))
                assert closed <= best + 1e-12
                assert best - closed <= resolution


class TestPgStep:

    def test_tiny_step_returns_same_point(self, rng):
        _, _, obj = _random_problem(rng)
        z = project(0.2, rng.standard_normal((16, 4)), 1.0)
        step = pg_step(z, 1e-14, obj, P=1.0)
        assert step.d == pytest.approx(z.d, abs=1e-12)
        np.testing.assert_allclose(step.Xbar, z.Xbar, atol=1e-12)

    def test_backtracked_step_decreases_objective(self, rng):
        _, _, obj = _random_problem(rng)
        cfg = SolverConfig()
        for _ in range(5):
            z = project(0.2, rng.standard_normal((16, 4)), 1.0)
            gamma = backtracking_stepsize(z, obj, cfg, P=1.0)
            assert obj.value(pg_step(z, gamma, obj, P=1.0)) < obj.value(z)

    def test_power_inferred_from_point(self, rng):
        _, _, obj = _random_problem(rng)
        z = project(0.2, rng.standard_normal((16, 4)), 2.0)
        assert is_constant_envelope(pg_step(z, 0.01, obj).Xbar, 2.0)

    @pytest.mark.parametrize("gamma", [0.0, -1.0])
    def test_nonpositive_step(self, rng, gamma):
        _, _, obj = _random_problem(rng)
        z = project(0.2, rng.standard_normal((16, 4)), 1.0)
        with pytest.raises(DomainError):
            pg_step(z, gamma, obj)


class TestLineSearch:

    def _search(self, cfg, lipschitz):
        toy = QuadraticToy(lipschitz)
        z = DecisionPoint(1.0, np.ones((2, 2)))
        f, grad_d, grad_X = toy.value_and_gradient(z)
        search = BacktrackingLineSearch(cfg)
        return search, search.search(toy, z, f, grad_d, grad_X, _identity_projection), f

    def test_accepted_step_respects_lipschitz_bound(self):
        cfg = SolverConfig(initial_step=1.0, shrink=0.5)
        lipschitz = 10.0
        _, step, _ = self._search(cfg, lipschitz)
        assert not step.failed
        assert step.gamma >= cfg.shrink / lipschitz

    def test_zero_decrease_constant_accepts_first_trial(self):
        cfg = SolverConfig(initial_step=1.0, sufficient_decrease=0.0)
        _, step, f = self._search(cfg, 1.0)
        assert step.backtracks == 0
        assert step.gamma == 1.0
        assert step.value <= f

    def test_accepted_step_never_increases(self):
        _, step, f = self._search(SolverConfig(), 7.0)
        assert step.value <= f

    def test_accepted_step_doubles_for_next_search(self):
        search, step, _ = self._search(SolverConfig(initial_step=1.0), 10.0)
        assert search.initial_step == 2.0 * step.gamma

    def test_failure_returns_smallest_step(self):
        cfg = SolverConfig(initial_step=1.0, max_backtracks=0)
        _, step, f = self._search(cfg, 10.0)
        assert step.failed
        assert step.gamma == 1.0
        assert step.value > f

    def test_decrease_alone_is_not_enough(self):
        # γΛ = 1.5 still lowers f but overshoots the curvature bound
        lipschitz = 10.0
        _, step, f = self._search(SolverConfig(initial_step=0.15), lipschitz)
        assert step.backtracks == 1
        assert step.gamma * lipschitz <= 1.0
        assert step.value < f

    def test_extrapolated_base_is_measured_against_model(self):
        toy = QuadraticToy(4.0)
        w = DecisionPoint(-2.0, np.full((2, 2), -2.0))
        f_w, grad_d, grad_X = toy.value_and_gradient(w)
        cfg = SolverConfig(initial_step=1.0)
        step = BacktrackingLineSearch(cfg).search(toy, w, f_w, grad_d, grad_X, _identity_projection)
        assert step.value <= f_w + model_gap(w, step.point, grad_d, grad_X, step.gamma, cfg.sufficient_decrease)
        assert step.gamma * toy.lipschitz <= 1.0


class TestImprovementWindow:

    def test_single_short_step_does_not_stop(self):
        window = ImprovementWindow(tol=1e-4, window=5)
        window.reset(1.0)
        values = [0.99, 0.98, 0.97, 0.96, 0.95991]
        assert not any(window.update(v) for v in values)

    def test_stops_once_average_improvement_is_small(self):
        window = ImprovementWindow(tol=1e-4, window=3)
        window.reset(1.0)
        assert not window.update(0.5)
        for _ in range(2):
            assert not window.update(0.5 - 1e-6)
        assert window.update(0.5 - 2e-6)

    def test_unit_window_compares_neighbours(self):
        window = ImprovementWindow(tol=1e-4, window=1)
        window.reset(1.0)
        assert not window.update(0.9)
        assert window.update(0.89995)

    def test_infinite_tolerance_stops_immediately(self):
        window = ImprovementWindow(tol=math.inf, window=10)
        window.reset(1.0)
        assert window.update(0.0)

    def test_reset_forgets_history(self):
        window = ImprovementWindow(tol=1e-3, window=2)
        window.reset(1.0)
        window.update(0.5)
        window.reset(0.2)
        assert window.update(0.2)


class TestBeta:

    def test_recursion_values(self):
        beta1 = next_beta(1.0)
        assert beta1 == pytest.approx((1 + math.sqrt(5)) / 2)
        beta2 = next_beta(beta1)
        assert beta2 == pytest.approx((1 + math.sqrt(1 + 4 * beta1**2)) / 2)
        assert beta2 == pytest.approx(2.1935, abs=1e-4)

    def test_increasing(self):
        beta = 1.0
        for _ in range(20):
            nxt = next_beta(beta)
            assert nxt > beta
            beta = nxt


class TestSolvePg:

    def test_scalar_channel_reaches_grid_optimum(self):
        channel = Channel(np.array([[1.0 + 0j]]))
        Sbar = stack_real(np.array([[1.0 + 0j]]))
        cfg = SolverConfig(max_iters=2000, seed=3)
        report = solve_pg(channel, Sbar, 1.0, cfg)

        phases = np.linspace(0.0, 2 * np.pi, 721)[:, None]
        gains = np.linspace(0.0, 3.0, 601)[None, :]
        grid = np.maximum(np.abs(np.cos(phases) - gains), np.abs(np.sin(phases))) - gains
        best = float(grid.min())
        assert best == pytest.approx(-1.0)
        assert report.final_exact <= best + cfg.sigma * math.log(4) + 1e-9

    def test_infinite_tolerance_stops_after_one_iteration(self, small_instance):
        channel, S = small_instance
        report = solve_pg(channel, stack_real(S), 1.0, SolverConfig(tol=math.inf))
        assert report.iterations == 1
        assert report.stop_reason == StopReason.TOLERANCE

    def test_trace_non_increasing(self):
        rng = np.random.default_rng(20)
        cfg = SolverConfig(max_iters=150)
        for k in range(20):
            channel, Sbar, _ = _random_problem(rng, N=8, K=2, T=3)
            report = solve_pg(channel, Sbar, 1.0, cfg.model_copy(update={"seed": k}))
            assert np.all(np.diff(report.smooth_trace()) <= 1e-12)

    @pytest.mark.slow
    def test_trace_non_increasing_at_full_size(self):
        for k in range(20):
            rng = np.random.default_rng([404, k])
            channel, Sbar, _ = _random_problem(rng, N=64, K=8, T=10)
            report = solve_pg(channel, Sbar, 1.0, SolverConfig(seed=k))
            assert np.all(np.diff(report.smooth_trace()) <= 1e-12)

    def test_final_point_feasible(self, small_instance, fast_solver):
        channel, S = small_instance
        report = solve_pg(channel, stack_real(S), 2.0, fast_solver)
        assert report.d >= 0.0
        assert is_constant_envelope(report.Xbar, 2.0)
        assert report.final_smooth <= report.trace[0].f_smooth

    def test_max_iters_stop(self, small_instance):
        channel, S = small_instance
        report = solve_pg(channel, stack_real(S), 1.0, SolverConfig(max_iters=3, tol=1e-300))
        assert report.iterations == 3
        assert report.stop_reason == StopReason.MAX_ITERS

    def test_deterministic(self, small_instance, fast_solver):
        channel, S = small_instance
        a = solve_pg(channel, stack_real(S), 1.0, fast_solver)
        b = solve_pg(channel, stack_real(S), 1.0, fast_solver)
        np.testing.assert_array_equal(a.Xbar, b.Xbar)
        assert a.iterations == b.iterations

    def test_symbol_rows_checked(self, small_instance, fast_solver):
        channel, S = small_instance
        with pytest.raises(DomainError):
            solve_pg(channel, stack_real(S[:1]), 1.0, fast_solver)

    def test_sparse_trace_keeps_last_iteration(self, small_instance):
        channel, S = small_instance
        report = solve_pg(channel, stack_real(S), 1.0, SolverConfig(max_iters=7, tol=1e-300, trace_every=3))
        assert [r.iteration for r in report.trace] == [0, 3, 6, 7]


class TestSolveFpg:

    def test_first_iteration_is_pg_step(self, small_instance):
        channel, S = small_instance
        cfg = SolverConfig(max_iters=1, seed=9)
        pg = solve_pg(channel, stack_real(S), 1.0, cfg)
        fpg = solve_fpg(channel, stack_real(S), 1.0, cfg)
        assert fpg.d == pg.d
        np.testing.assert_array_equal(fpg.Xbar, pg.Xbar)

    def test_feasible_and_improves(self, small_instance, fast_solver):
        channel, S = small_instance
        report = solve_fpg(channel, stack_real(S), 1.0, fast_solver)
        assert report.method == "fpg"
        assert is_constant_envelope(report.Xbar, 1.0)
        assert report.final_smooth < report.trace[0].f_smooth

    def test_restart_keeps_accepted_values_non_increasing(self):
        rng = np.random.default_rng(31)
        cfg = SolverConfig(max_iters=300, tol=1e-10, restart_on_increase=True)
        for k in range(8):
            channel, Sbar, _ = _random_problem(rng, N=16, K=4, T=5)
            report = solve_fpg(channel, Sbar, 1.0, cfg.model_copy(update={"seed": k}))
            assert np.all(np.diff(report.smooth_trace()) <= 1e-12)
            assert is_constant_envelope(report.Xbar, 1.0)

    def test_restart_fires_where_plain_fpg_rises(self):
        rng = np.random.default_rng(32)
        base = SolverConfig(max_iters=300, tol=1e-10)
        rising = 0
        for k in range(8):
            channel, Sbar, _ = _random_problem(rng, N=16, K=4, T=5)
            cfg = base.model_copy(update={"seed": k})
            plain = solve_fpg(channel, Sbar, 1.0, cfg)
            guarded = solve_fpg(channel, Sbar, 1.0, cfg.model_copy(update={"restart_on_increase": True}))
            if np.any(np.diff(plain.smooth_trace()) > 0):
                rising += 1
                assert guarded.restarts > 0
            else:
                assert guarded.restarts == 0
        assert rising > 0

    def test_default_fpg_converges(self):
        rng = np.random.default_rng(33)
        channel, Sbar, _ = _random_problem(rng, N=32, K=4, T=10)
        report = solve_fpg(channel, Sbar, 1.0, SolverConfig(seed=1))
        assert report.stop_reason == StopReason.TOLERANCE
        assert report.final_exact < report.trace[0].f_exact
        assert report.final_smooth < report.trace[0].f_smooth

    def test_dispatch_on_accelerate(self, small_instance, fast_solver):
        channel, S = small_instance
        assert solve(channel, stack_real(S), 1.0, fast_solver).method == "pg"
        assert solve(channel, stack_real(S), 1.0, fast_solver.model_copy(update={"accelerate": True})).method == "fpg"

    @pytest.mark.slow
    def test_fewer_iterations_than_pg(self):
        pg_iters, fpg_iters = [], []
        for k in range(20):
            rng = np.random.default_rng([2024, k])
            channel, Sbar, _ = _random_problem(rng, N=64, K=8, T=10)
            cfg = SolverConfig(seed=k)
            pg_iters.append(solve_pg(channel, Sbar, 1.0, cfg).iterations)
            fpg_iters.append(solve_fpg(channel, Sbar, 1.0, cfg).iterations)
        assert np.median(fpg_iters) < np.median(pg_iters)


class TestSolverOptions:

    def test_stop_on_exact(self, small_instance, fast_solver):
        channel, S = small_instance
        report = solve_pg(channel, stack_real(S), 1.0, fast_solver.model_copy(update={"stop_on": StopOn.EXACT}))
        assert report.iterations >= 1
        assert is_constant_envelope(report.Xbar, 1.0)

    def test_continuation_shrinks_sigma(self, small_instance):
        channel, S = small_instance
        cfg = SolverConfig(max_iters=500, tol=1e-3, sigma=0.2, sigma_decay=0.5, sigma_min=0.05)
        report = solve_pg(channel, stack_real(S), 1.0, cfg)
        assert 0.05 <= report.sigma_final < 0.2

    def test_ce_zf_initialization(self, small_instance):
        channel, S = small_instance
        cfg = SolverConfig(init=InitMode.CE_ZF)
        start = initial_point(channel, stack_real(S), 1.0, cfg)
        warm = ce_zf_precode(channel, S, 1.0)
        np.testing.assert_array_equal(start.Xbar, warm.Xbar)
        assert start.d == warm.d

    def test_random_phase_initialization(self, small_instance):
        channel, S = small_instance
        cfg = SolverConfig(seed=4)
        a = initial_point(channel, stack_real(S), 1.0, cfg)
        b = initial_point(channel, stack_real(S), 1.0, cfg)
        np.testing.assert_array_equal(a.Xbar, b.Xbar)
        assert is_constant_envelope(a.Xbar, 1.0)
        assert a.d >= 0.0

    def test_channel_forms_accepted(self, small_instance):
        channel, _ = small_instance
        np.testing.assert_array_equal(as_channel(lift(channel)).H, channel.H)
        np.testing.assert_array_equal(as_channel(channel.H.real).H, channel.H.real + 0j)
        np.testing.assert_array_equal(as_channel(channel.H).H, channel.H)

    def test_real_square_array_is_a_complex_channel(self):
        channel = as_channel(np.eye(4))
        assert (channel.K, channel.N) == (4, 4)
        np.testing.assert_array_equal(channel.H, np.eye(4))


class TestSolverReport:

    def test_trace_csv(self, small_instance, tmp_path):
        channel, S = small_instance
        report = solve_pg(channel, stack_real(S), 1.0, SolverConfig(max_iters=5, tol=1e-300))
        path = report.write_trace_csv(tmp_path / "trace.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(TRACE_HEADER)
        assert len(lines) == 1 + len(report.trace)
        assert lines[1].startswith("0,")

    def test_summary(self, small_instance, fast_solver):
        channel, S = small_instance
        summary = solve_fpg(channel, stack_real(S), 1.0, fast_solver).summary()
        assert "fpg" in summary
        assert "d=" in summary

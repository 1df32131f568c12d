import numpy as np
import pytest

from robustkalman import (LinearSSM, NonlinearSSM, build_preset,
                          jacobian_check, simulate_ideal,
                          simulate_replications, synthetic_vehicle_channels)
from robustkalman.presets import quadratic_transition


class TestPresets:
    def test_sima(self):
        m = build_preset("sima")
        assert (m.p, m.q) == (1, 1)
        for mat in (m.F(1), m.Z(1), m.Q(1), m.V(1)):
            np.testing.assert_array_equal(mat, [[1.0]])
        np.testing.assert_array_equal(m.a0, [1.0])

    def test_simb(self):
        m = build_preset("simb")
        np.testing.assert_array_equal(m.F(3), [[1, 1, 0], [0, 1, 1], [0, 0, 0]])
        np.testing.assert_array_equal(m.Z(1), [[1, 0, 0], [0, 0, 1]])
        np.testing.assert_array_equal(m.Q(1), np.diag([0, 0, 0.001]))
        np.testing.assert_array_equal(m.V(1), np.diag([0.1, 0.001]))
        np.testing.assert_array_equal(m.a0, np.zeros(3))
        np.testing.assert_array_equal(m.Q0, np.diag([1, 0.1, 0.001]))

    def test_rw2d(self):
        m = build_preset("rw2d")
        np.testing.assert_array_equal(m.a0, [20.0, 0.0])
        np.testing.assert_array_equal(m.Q0, np.zeros((2, 2)))
        np.testing.assert_array_equal(m.Z(1), [[0.3, 1.0], [-0.3, 1.0]])
        np.testing.assert_array_equal(m.Q(1), np.diag([0.0, 9.0]))

    def test_ar2(self):
        m = build_preset("ar2")
        np.testing.assert_array_equal(m.F(1), [[1.0, -0.9], [1.0, 0.0]])
        assert m.q == 1

    def test_m1(self):
        m = build_preset("m1", T=100, seed=3)
        np.testing.assert_array_equal(m.Q(1), np.diag([0, 0, 0.01]))
        np.testing.assert_array_equal(m.V(1), np.diag([5, 0.01]))
        ch = synthetic_vehicle_channels(100, seed=3)
        assert m.a0[0] == ch["altitude"][0]
        np.testing.assert_array_equal(m.a0[1:], [0.0, 0.0])

    def test_m2_time_varying(self):
        m = build_preset("m2", T=60, seed=1)
        ch = synthetic_vehicle_channels(60, seed=1)
        assert m.F(5)[0, 1] == ch["speed"][4]
        assert m.F(999)[0, 1] == ch["speed"][-1]  # clamped beyond the channels
        assert not m.time_invariant
        np.testing.assert_array_equal(m.Q(1), np.diag([0, 0, 0.05]))

    def test_m3_dimensions(self):
        m = build_preset("m3")
        assert isinstance(m, NonlinearSSM)
        assert (m.p, m.q) == (5, 4)
        np.testing.assert_array_equal(m.Q(1), np.diag([0, 0, 2, 0, 0.005]))
        np.testing.assert_array_equal(m.V(1), np.diag([5, 2, 2, 0.005]))

    def test_unknown_preset(self):
        with pytest.raises(Exception):
            build_preset("nonsense")


class TestQuadraticModel:
    def test_kron_equals_sum_form(self, rng):
        A, B = quadratic_transition(dt=0.5)
        m = build_preset("m3", dt=0.5)
        for _ in range(20):
            x = rng.standard_normal(5) * 5
            expected = sum(A[:, l * 5:(l + 1) * 5] @ x * x[l] for l in range(5)) + B @ x
            np.testing.assert_allclose(m.f(1, x, None, np.zeros(5)), expected,
                                       rtol=1e-12)
            # the quadratic term feeds dt * speed * pitch into the altitude
            quad = A @ np.kron(x, x)
            np.testing.assert_allclose(quad, [0.5 * x[1] * x[3], 0, 0, 0, 0],
                                       atol=1e-12)

    def test_jacobian_at_zero_is_linear_part(self):
        m = build_preset("m3")
        _, B = quadratic_transition(dt=1.0)
        np.testing.assert_array_equal(
            m.jac_f_x(1, np.zeros(5), None, np.zeros(5)), B)

    def test_jacobian_check_passes(self, rng):
        m = build_preset("m3")
        for _ in range(5):
            rep = jacobian_check(m, rng.standard_normal(5) * 10)
            assert rep.passed, rep.max_rel_dev

    def test_linear_wrap_jacobian_exact(self):
        lin = build_preset("simb")
        wrapped = NonlinearSSM.from_linear(lin)
        x = np.array([1.0, -2.0, 0.5])
        np.testing.assert_array_equal(wrapped.jac_f_x(1, x, None, np.zeros(3)),
                                      lin.F(1))
        rep = jacobian_check(wrapped, x)
        assert rep.passed


class TestSimulateIdeal:
    def test_degenerate_start(self):
        m = build_preset("rw2d")  # Q0 = 0
        traj = simulate_ideal(m, 5, seed=7)
        np.testing.assert_array_equal(traj.x0_ideal, m.a0)

    def test_deterministic(self):
        m = build_preset("simb")
        a = simulate_ideal(m, 20, seed=5)
        b = simulate_ideal(m, 20, seed=5)
        np.testing.assert_array_equal(a.x_real, b.x_real)
        np.testing.assert_array_equal(a.y_real, b.y_real)

    def test_zero_noise_recursion(self):
        m = LinearSSM(F=[[0.8, 0.1], [0.0, 0.9]], Z=[[1.0, 0.0]],
                      Q=np.zeros((2, 2)), V=[[0.0]],
                      a0=[1.0, 2.0], Q0=np.zeros((2, 2)))
        traj = simulate_ideal(m, 10, seed=0)
        x = m.a0
        for t in range(10):
            x = m.F(t + 1) @ x
            np.testing.assert_allclose(traj.x_ideal[t], x, atol=1e-14)

    def test_innovation_variance(self):
        # increments of the all-ones scalar model are exactly its innovations
        m = build_preset("sima")
        traj = simulate_ideal(m, 10_000, seed=11)
        increments = np.diff(traj.x_ideal[:, 0])
        assert abs(np.var(increments) - 1.0) < 0.05

    def test_first_state_mean(self):
        # mean of x_1 over 1e5 replications within 3 standard errors of F a0
        m = build_preset("sima")
        batch = simulate_replications(m, 1, None, seed=3, n_runs=100_000)
        x1 = batch.x_real[:, 0, 0]
        se = x1.std() / np.sqrt(x1.size)
        assert abs(x1.mean() - 1.0) < 3 * se

    def test_indicators_false(self):
        traj = simulate_ideal(build_preset("sima"), 5, seed=0)
        assert not traj.io_hits.any() and not traj.ao_hits.any()
        np.testing.assert_array_equal(traj.x_real, traj.x_ideal)

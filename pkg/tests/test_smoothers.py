import numpy as np
import pytest

from robustkalman import (CLASSICAL, LinearSSM, NonlinearSSM, build_preset,
                          gain_schedule, rls_ao, rls_io, run_filter,
                          simulate_ideal, simulate_replications, smooth)
from robustkalman.filters import run_filter_batch, _b_sequence
from robustkalman.smoothers import smooth_batch, smoother_gains

from conftest import random_clean_model
from oracles import best_linear_predictor


class TestSmoother:
    def test_single_step_equals_filter(self):
        m = build_preset("sima")
        traj = simulate_ideal(m, 1, seed=0)
        res = run_filter(m, traj.y_real)
        sm = smooth(res)
        np.testing.assert_array_equal(sm.x_smooth[0], res.states[0].x_filt)

    def test_endpoint_bitwise_equal(self):
        m = build_preset("simb")
        traj = simulate_ideal(m, 20, seed=5)
        res = run_filter(m, traj.y_real)
        sm = smooth(res)
        np.testing.assert_array_equal(sm.x_smooth[-1], res.states[-1].x_filt)
        np.testing.assert_array_equal(sm.Sigma_smooth[-1], res.states[-1].Sigma_filt)

    def test_noise_free_dynamics_backward_consistency(self):
        # Q = 0 and invertible F: smoothed states satisfy x_{t|T} = F^{-1} x_{t+1|T}
        F = np.array([[0.9, 0.3], [-0.2, 0.8]])
        m = LinearSSM(F=F, Z=np.eye(2), Q=np.zeros((2, 2)), V=np.eye(2),
                      a0=[1.0, -1.0], Q0=np.eye(2))
        traj = simulate_ideal(m, 12, seed=3)
        sm = smooth(run_filter(m, traj.y_real))
        Finv = np.linalg.inv(F)
        for t in range(11):
            np.testing.assert_allclose(sm.x_smooth[t], Finv @ sm.x_smooth[t + 1],
                                       atol=1e-9)

    def test_batch_oracle_equivalence(self, rng):
        for _ in range(25):
            m = random_clean_model(rng)
            T = int(rng.integers(2, 9))
            traj = simulate_ideal(m, T, seed=int(rng.integers(1 << 30)))
            sm = smooth(run_filter(m, traj.y_real))
            oracle = best_linear_predictor(m, traj.y_real)
            np.testing.assert_allclose(sm.x_smooth, oracle["x_smooth"], atol=1e-8)
            np.testing.assert_allclose(sm.x0_smooth, oracle["x0_smooth"], atol=1e-8)
            np.testing.assert_allclose(sm.Sigma_smooth, oracle["Sigma_smooth"],
                                       atol=1e-8)

    def test_smoothing_never_inflates_covariance(self, rng):
        for _ in range(20):
            m = random_clean_model(rng)
            traj = simulate_ideal(m, 10, seed=int(rng.integers(1 << 30)))
            res = run_filter(m, traj.y_real)
            sm = smooth(res)
            for t in range(10):
                gap = res.states[t].Sigma_filt - sm.Sigma_smooth[t]
                assert np.linalg.eigvalsh(gap)[0] >= -1e-9

    def test_smoother_beats_filter_on_ideal_data(self):
        m = build_preset("sima")
        T, t_star, n = 50, 35, 3000
        batch = simulate_replications(m, T, None, seed=7, n_runs=n)
        sched = gain_schedule(m, T)
        xp, xf = run_filter_batch(sched, batch.y_real, CLASSICAL)
        xs = smooth_batch(sched, smoother_gains(sched), xp, xf)
        target = batch.x_real[:, t_star - 1]
        mse_f = np.mean((xf[:, t_star - 1] - target) ** 2)
        mse_s = np.mean((xs[:, t_star - 1] - target) ** 2)
        assert mse_s < mse_f

    def test_batch_matches_per_replication(self):
        m = build_preset("simb")
        batch = simulate_replications(m, 15, None, seed=2, n_runs=4)
        sched = gain_schedule(m, 15)
        gains = smoother_gains(sched)
        for variant in (CLASSICAL, rls_ao(b=0.5), rls_io(b=0.5)):
            b_seq = _b_sequence(variant, None, 15)
            xp, xf = run_filter_batch(sched, batch.y_real, variant, b_seq)
            xs = smooth_batch(sched, gains, xp, xf)
            for i in range(4):
                sm = smooth(run_filter(m, batch.y_real[i], variant))
                np.testing.assert_allclose(xs[i], sm.x_smooth, atol=1e-12)

    def test_extended_filter_smoothing(self):
        # smoothing an extended run uses the per-step linearizations
        m = build_preset("m3", T=40)
        traj = simulate_ideal(m, 40, seed=9)
        res = run_filter(m, traj.y_real)
        sm = smooth(res)
        assert np.all(np.isfinite(sm.x_smooth))
        np.testing.assert_array_equal(sm.x_smooth[-1], res.states[-1].x_filt)
        # consistency with the linear smoother when the model is linear
        lin = build_preset("simb")
        ltraj = simulate_ideal(lin, 15, seed=1)
        a = smooth(run_filter(NonlinearSSM.from_linear(lin), ltraj.y_real))
        b = smooth(run_filter(lin, ltraj.y_real))
        np.testing.assert_allclose(a.x_smooth, b.x_smooth, atol=1e-12)

    def test_csv_export(self, tmp_path):
        m = build_preset("simb")
        traj = simulate_ideal(m, 5, seed=0)
        sm = smooth(run_filter(m, traj.y_real))
        path = sm.to_csv(tmp_path / "smooth.csv")
        lines = open(path).read().splitlines()
        assert lines[0] == "t,x_smooth_1,x_smooth_2,x_smooth_3," \
                           "sig_smooth_1,sig_smooth_2,sig_smooth_3"
        assert len(lines) == 6

    def test_incomplete_result_rejected(self):
        m = build_preset("sima")
        traj = simulate_ideal(m, 5, seed=0)
        res = run_filter(m, traj.y_real)
        res.states.clear()
        with pytest.raises(ValueError):
            smooth(res)

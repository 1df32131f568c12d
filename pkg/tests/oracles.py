"""Independent oracles used by the test suite.

The central one is the batch best-linear-predictor: filtered and smoothed
means assembled directly from the joint Gaussian covariance structure of
(X_0..X_T, Y_1..Y_T), with no recursion.  It shares no code with the filter
implementation, so agreement is a genuine two-route check.
"""

import numpy as np


def joint_moments(model, T):
    """Means and covariance blocks of the stacked states and observations.

    Returns (m_x, m_y, P, S_yy) where P[t][s] = Cov(X_t, X_s) for
    0 <= s, t <= T and S_yy is the q*T x q*T covariance of (Y_1..Y_T).
    """
    p, q = model.p, model.q
    m_x = [model.a0.copy()]
    for t in range(1, T + 1):
        m_x.append(model.F(t) @ m_x[t - 1])
    m_y = [model.Z(t) @ m_x[t] for t in range(1, T + 1)]

    P = [[None] * (T + 1) for _ in range(T + 1)]
    P[0][0] = model.Q0.copy()
    for t in range(1, T + 1):
        F = model.F(t)
        P[t][t] = F @ P[t - 1][t - 1] @ F.T + model.Q(t)
        for s in range(t):
            P[t][s] = F @ P[t - 1][s]
            P[s][t] = P[t][s].T

    S_yy = np.zeros((q * T, q * T))
    for t in range(1, T + 1):
        Zt = model.Z(t)
        for s in range(1, T + 1):
            blk = Zt @ P[t][s] @ model.Z(s).T
            if t == s:
                blk = blk + model.V(t)
            S_yy[(t - 1) * q:t * q, (s - 1) * q:s * q] = blk
    return m_x, m_y, P, S_yy


def best_linear_predictor(model, ys, T=None):
    """Filtered and smoothed state means by direct projection.

    x_hat_{t|s} = m_x[t] + Cov(X_t, Y_{1:s}) Cov(Y_{1:s})^- (y_{1:s} - m_y),
    evaluated for s = t (filtering) and s = T (smoothing).  Also returns the
    corresponding error covariances.
    """
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if T is None:
        T = ys.shape[0]
    p, q = model.p, model.q
    m_x, m_y, P, S_yy = joint_moments(model, T)
    yvec = ys.reshape(-1)
    mvec = np.concatenate(m_y)

    def project(t, s):
        S_xy = np.hstack([P[t][k] @ model.Z(k).T for k in range(1, s + 1)])
        Syy = S_yy[:q * s, :q * s]
        gain = S_xy @ np.linalg.pinv(Syy, rcond=1e-12)
        mean = m_x[t] + gain @ (yvec[:q * s] - mvec[:q * s])
        cov = P[t][t] - gain @ S_xy.T
        return mean, cov

    filt = [project(t, t) for t in range(1, T + 1)]
    smth = [project(t, T) for t in range(0, T + 1)]
    return {
        "x_filt": np.stack([f[0] for f in filt]),
        "Sigma_filt": np.stack([f[1] for f in filt]),
        "x_smooth": np.stack([s[0] for s in smth[1:]]),
        "Sigma_smooth": np.stack([s[1] for s in smth[1:]]),
        "x0_smooth": smth[0][0],
    }


def riccati_fixed_point_sima():
    """Steady-state prediction variance of the all-ones scalar model.

    Iterates  S <- S/(S+1) + 1  to convergence; the filtered variance is then
    S/(S+1).  Used as the oracle for the ideal-model MSE.
    """
    s = 1.0
    for _ in range(200):
        s_next = s / (s + 1.0) + 1.0
        if abs(s_next - s) < 1e-14:
            break
        s = s_next
    return s, s / (s + 1.0)


def expected_clip_excess_gaussian(b, sigma=1.0):
    """E(|X| - b)_+ for X ~ N(0, sigma^2), in closed form.

    Equals 2 sigma phi(b/sigma) - 2 b (1 - Phi(b/sigma)).
    """
    from scipy.stats import norm
    u = b / sigma
    return 2.0 * sigma * norm.pdf(u) - 2.0 * b * (1.0 - norm.cdf(u))


def radius_b_closed_form(sigma, r):
    """Root of (1-r) E(|X| - b)_+ = r b for scalar X ~ N(0, sigma^2)."""
    from scipy.optimize import brentq
    return brentq(lambda b: (1.0 - r) * expected_clip_excess_gaussian(b, sigma) - r * b,
                  1e-10, 1e6)

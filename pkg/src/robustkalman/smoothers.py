"""Fixed-interval backward smoothing on top of any filter result.

The backward pass is the classical one:

    J_t     = Sigma_{t|t} F_{t+1}' (Sigma_{t+1|t})^-
    x_{t|T} = x_{t|t} + J_t (x_{t+1|T} - x_{t+1|t})
    S_{t|T} = Sigma_{t|t} + J_t (S_{t+1|T} - Sigma_{t+1|t}) J_t'

where F_{t+1} is the transition that maps step t to t+1 (for nonlinear runs:
the Jacobian recorded by the filter).  The prediction covariance is inverted
by pseudo-inverse so singular transitions and noise-free steps are fine.

Robust smoothing needs no extra machinery: the backward increment reuses the
already-robustified correction of the forward pass, so running this recursion
on a robust filter's output *is* the robust smoother.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .linalg import clamp_psd, pseudo_inverse, symmetrize


@dataclass
class SmootherResult:
    """Smoothed states x_{t|T} for t = 1..T plus the smoothed initial state.

    The endpoint t = T equals the filter output bitwise.  ``gains`` holds
    J_1..J_{T-1} (and ``gain0`` the gain used to smooth the initial state).
    """

    x_smooth: np.ndarray       # (T, p)
    Sigma_smooth: np.ndarray   # (T, p, p)
    gains: list = field(default_factory=list)
    x0_smooth: np.ndarray = None
    Sigma0_smooth: np.ndarray = None
    gain0: np.ndarray = None

    @property
    def T(self):
        return self.x_smooth.shape[0]

    def to_csv(self, path):
        """Columns: t, x_smooth_*, sig_smooth_* (diagonal)."""
        p = self.x_smooth.shape[1]
        header = (["t"]
                  + [f"x_smooth_{j + 1}" for j in range(p)]
                  + [f"sig_smooth_{j + 1}" for j in range(p)])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i in range(self.T):
                w.writerow([i + 1]
                           + [repr(float(v)) for v in self.x_smooth[i]]
                           + [repr(float(v)) for v in np.diag(self.Sigma_smooth[i])])
        return path


def _gain(Sigma_filt, F_next, Sigma_pred_next):
    return Sigma_filt @ F_next.T @ pseudo_inverse(symmetrize(Sigma_pred_next))


def smooth(result, model=None):
    """Backward pass over a complete FilterResult (any variant).

    Requires the filter states for t = 1..T; also smooths the initial state
    using the run's initialization.
    """
    states = result.states
    T = len(states)
    if T < 1:
        raise ValueError("cannot smooth an empty filter result")
    p = states[0].x_filt.shape[0]
    xs = np.empty((T, p))
    Ss = np.empty((T, p, p))
    xs[-1] = states[-1].x_filt
    Ss[-1] = states[-1].Sigma_filt
    gains = [None] * (T - 1)
    for t in range(T - 1, 0, -1):
        cur, nxt = states[t - 1], states[t]
        J = _gain(cur.Sigma_filt, nxt.F, nxt.Sigma_pred)
        xs[t - 1] = cur.x_filt + J @ (xs[t] - nxt.x_pred)
        Ss[t - 1] = clamp_psd(
            cur.Sigma_filt + J @ (Ss[t] - nxt.Sigma_pred) @ J.T,
            what=f"smoothing covariance at t={t}")
        gains[t - 1] = J
    init = result.initial
    J0 = _gain(init.Sigma_filt, states[0].F, states[0].Sigma_pred)
    x0 = init.x_filt + J0 @ (xs[0] - states[0].x_pred)
    S0 = clamp_psd(init.Sigma_filt + J0 @ (Ss[0] - states[0].Sigma_pred) @ J0.T,
                   what="smoothing covariance at t=0")
    return SmootherResult(x_smooth=xs, Sigma_smooth=Ss, gains=gains,
                          x0_smooth=x0, Sigma0_smooth=S0, gain0=J0)


def smoother_gains(sched):
    """J_1..J_{T-1} for a linear gain schedule (data-independent)."""
    return [_gain(sched.Sigma_filt[i], sched.F[i + 1], sched.Sigma_pred[i + 1])
            for i in range(sched.T - 1)]


def smooth_batch(sched, gains, x_pred, x_filt):
    """Vectorized backward x-pass over a batch of filter runs.

    ``x_pred`` / ``x_filt`` are (n, T, p) from
    :func:`robustkalman.filters.run_filter_batch`; returns smoothed states of
    the same shape.  Matches :func:`smooth` replication by replication.
    """
    xs = x_filt.copy()
    for t in range(sched.T - 1, 0, -1):
        J = gains[t - 1]
        xs[:, t - 1] = x_filt[:, t - 1] + (xs[:, t] - x_pred[:, t]) @ J.T
    return xs

"""Kalman filter and its outlier-robust variants as strictly recursive
predict/correct state machines, plus their extended (linearized) versions.

Correction steps, all sharing the same gain K and innovation dY:

* classical:  x + K dY                      (unbounded in the observation)
* rls-ao:     x + H_b(K dY)                 (clipped correction; damps
              non-propagating outliers)
* rls-io:     x + Zsigma (dY - H_b((I - Z K) dY))
              (robustly estimates the observation-error part of dY and maps
              the remainder back through the generalized inverse Zsigma, so
              genuine state jumps are followed almost immediately)

H_b is the radial clipping function of :func:`robustkalman.linalg.huber_clip`;
with b = +inf both robust variants collapse to the classical filter (for
rls-io this relies on the identity ``Zsigma Z K = K``, which holds for any
rank of Z).

The covariance recursion is identical across variants and never depends on
the data, so for linear models the whole per-step schedule (prediction and
filtering covariances, gains, innovation covariances, generalized inverses)
is computed once per (model, horizon, missingness pattern) and shared.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .linalg import (clamp_psd, gen_inverse_bundle, huber_clip,
                     huber_clip_rows, pseudo_inverse, symmetrize)
from .models import NonlinearSSM

STEADY_STATE_TOL = 1e-9  # Frobenius tolerance for prediction-covariance convergence


@dataclass(frozen=True)
class FilterVariant:
    """Which correction step to run, and where its clipping height comes from.

    ``b`` may be a positive float (including inf) or None, in which case a
    calibration table must be supplied to the filter run.  ``norm`` selects
    the clipping norm (None = Euclidean).
    """

    kind: str                 # "classical" | "rls-ao" | "rls-io"
    b: float = None
    norm: object = None
    label: str = None

    def __post_init__(self):
        if self.kind not in ("classical", "rls-ao", "rls-io"):
            raise ValueError(f"unknown filter variant {self.kind!r}")
        if self.b is not None and not self.b > 0:
            raise ValueError("clipping height must be positive (or None)")
        if self.label is None:
            object.__setattr__(self, "label", self.kind)

    @property
    def robust(self):
        return self.kind != "classical"


def classical():
    return FilterVariant("classical")


def rls_ao(b=None, norm=None, label=None):
    return FilterVariant("rls-ao", b, norm, label)


def rls_io(b=None, norm=None, label=None):
    return FilterVariant("rls-io", b, norm, label)


CLASSICAL = classical()


@dataclass
class FilterState:
    """One step of a filter run.

    ``F`` and ``Z`` are the transition / observation matrices actually used at
    this step (for nonlinear models: the Jacobians at the current estimates);
    the smoother reads them back.  ``clipped`` records whether the correction
    was shrunk; ``missing`` whether the observation was absent and the
    correction skipped.
    """

    t: int
    x_pred: np.ndarray
    Sigma_pred: np.ndarray
    x_filt: np.ndarray
    Sigma_filt: np.ndarray
    K: np.ndarray = None
    C: np.ndarray = None
    dY: np.ndarray = None
    F: np.ndarray = None
    Z: np.ndarray = None
    clipped: bool = False
    missing: bool = False


def initial_state(model):
    """The t = 0 state: x_{0|0} = a0, Sigma_{0|0} = Q0."""
    return FilterState(t=0, x_pred=model.a0.copy(), Sigma_pred=model.Q0.copy(),
                       x_filt=model.a0.copy(), Sigma_filt=model.Q0.copy())


def predict(prev, model, t):
    """Prediction step: (x_pred, Sigma_pred) from the filtered state at t-1."""
    F = model.F(t)
    x_pred = F @ prev.x_filt
    Sigma_pred = clamp_psd(F @ prev.Sigma_filt @ F.T + model.Q(t),
                           what="prediction covariance")
    return x_pred, Sigma_pred


def _gain(Sigma_pred, Z, V):
    C = symmetrize(Z @ Sigma_pred @ Z.T + V)
    K = Sigma_pred @ Z.T @ pseudo_inverse(C)
    return K, C


def _finish(t, x_pred, Sigma_pred, x_filt, K, C, dY, F, Z, clipped):
    Sigma_filt = clamp_psd((np.eye(Sigma_pred.shape[0]) - K @ Z) @ Sigma_pred,
                           what="filtering covariance")
    return FilterState(t=t, x_pred=x_pred, Sigma_pred=Sigma_pred,
                       x_filt=x_filt, Sigma_filt=Sigma_filt,
                       K=K, C=C, dY=dY, F=F, Z=Z, clipped=clipped)


def correct_classical(x_pred, Sigma_pred, y, model, t):
    """Classical correction x + K dY with the gain K = Sigma_pred Z' C^-.

    C is inverted by pseudo-inverse throughout, so singular innovation
    covariances (rank-deficient Z together with singular V) stay finite.
    """
    Z, V = model.Z(t), model.V(t)
    K, C = _gain(Sigma_pred, Z, V)
    dY = np.asarray(y, dtype=float) - Z @ x_pred
    x_filt = x_pred + K @ dY
    return _finish(t, x_pred, Sigma_pred, x_filt, K, C, dY, model.F(t), Z, False)


def correct_rls_ao(x_pred, Sigma_pred, y, model, t, b, norm=None):
    """Clipped correction x + H_b(K dY); the covariance recursion is unchanged."""
    Z, V = model.Z(t), model.V(t)
    K, C = _gain(Sigma_pred, Z, V)
    dY = np.asarray(y, dtype=float) - Z @ x_pred
    g = K @ dY
    h = huber_clip(g, b, norm)
    x_filt = x_pred + h
    return _finish(t, x_pred, Sigma_pred, x_filt, K, C, dY, model.F(t), Z,
                   not np.array_equal(g, h))


def correct_rls_io(x_pred, Sigma_pred, y, model, t, b, norm=None):
    """Tracking correction x + Zsigma (dY - H_b((I - Z K) dY)).

    (I - Z K) dY is the best linear reconstruction of the observation error;
    clipping it (rather than the whole correction) bounds how much of dY is
    attributed to observation noise, so state jumps are followed quickly.
    """
    Z, V = model.Z(t), model.V(t)
    K, C = _gain(Sigma_pred, Z, V)
    dY = np.asarray(y, dtype=float) - Z @ x_pred
    w = (np.eye(model.q) - Z @ K) @ dY
    h = huber_clip(w, b, norm)
    zsig = gen_inverse_bundle(Z, Sigma_pred).Zsigma
    x_filt = x_pred + zsig @ (dY - h)
    return _finish(t, x_pred, Sigma_pred, x_filt, K, C, dY, model.F(t), Z,
                   not np.array_equal(w, h))


class GainSchedule:
    """Data-independent per-step quantities of a linear filter run.

    Lists are indexed by t-1 for t = 1..T.  ``steady_state_index`` is the
    first step (1-based) at which the prediction covariance has converged
    (Frobenius change below 1e-9), or None if it never does within T.
    """

    def __init__(self, model, T, missing=None):
        p, q = model.p, model.q
        missing = np.zeros(T, dtype=bool) if missing is None \
            else np.asarray(missing, dtype=bool)
        self.model, self.T, self.missing = model, T, missing
        self.F = []; self.Z = []; self.Q = []; self.V = []
        self.Sigma_pred = []; self.Sigma_filt = []
        self.K = []; self.C = []; self.ImZK = []; self.Zsigma = []
        self.steady_state_index = None
        nonlinear = isinstance(model, NonlinearSSM)
        x_nom = model.a0
        Sf = model.Q0
        prev_Sp = None
        for t in range(1, T + 1):
            if nonlinear:
                # data-free approximation: linearize along the noise-free
                # nominal path (no observations to re-center on)
                u, w = model.u(t), model.w(t)
                F = np.asarray(model.jac_f_x(t, x_nom, u, model.vbar), dtype=float)
                Bj = np.asarray(model.jac_f_v(t, x_nom, u, model.vbar), dtype=float)
                x_nom = np.asarray(model.f(t, x_nom, u, model.vbar), dtype=float)
                Z = np.asarray(model.jac_z_x(t, x_nom, w, model.ebar), dtype=float)
                Dj = np.asarray(model.jac_z_e(t, x_nom, w, model.ebar), dtype=float)
                Q = Bj @ model.Q(t) @ Bj.T
                V = Dj @ model.V(t) @ Dj.T
            else:
                F, Z, Q, V = model.F(t), model.Z(t), model.Q(t), model.V(t)
            Sp = clamp_psd(F @ Sf @ F.T + Q, what=f"prediction covariance at t={t}")
            K, C = _gain(Sp, Z, V)
            if missing[t - 1]:
                Sf = Sp
            else:
                Sf = clamp_psd((np.eye(p) - K @ Z) @ Sp,
                               what=f"filtering covariance at t={t}")
            self.F.append(F); self.Z.append(Z); self.Q.append(Q); self.V.append(V)
            self.Sigma_pred.append(Sp); self.Sigma_filt.append(Sf)
            self.K.append(K); self.C.append(C)
            self.ImZK.append(np.eye(q) - Z @ K)
            self.Zsigma.append(gen_inverse_bundle(Z, Sp).Zsigma)
            if (self.steady_state_index is None and prev_Sp is not None
                    and np.linalg.norm(Sp - prev_Sp) < STEADY_STATE_TOL):
                self.steady_state_index = t
            prev_Sp = Sp


def gain_schedule(model, T, missing=None):
    """Precompute the shared covariance/gain schedule of a model.

    For linear models this is exact and shared by every run of length T with
    the same missingness pattern.  For nonlinear models it linearizes along
    the noise-free nominal trajectory, which is the data-free approximation
    used for clipping-height calibration; actual nonlinear filter runs
    re-linearize along their own estimates.
    """
    return GainSchedule(model, T, missing)


@dataclass
class FilterResult:
    """Output of a filter run: initialization plus one FilterState per step."""

    variant: FilterVariant
    model: object
    initial: FilterState
    states: list = field(default_factory=list)

    @property
    def T(self):
        return len(self.states)

    def _stack(self, attr):
        return np.stack([getattr(s, attr) for s in self.states])

    @property
    def x_pred(self):
        return self._stack("x_pred")

    @property
    def x_filt(self):
        return self._stack("x_filt")

    @property
    def Sigma_pred(self):
        return self._stack("Sigma_pred")

    @property
    def Sigma_filt(self):
        return self._stack("Sigma_filt")

    def to_csv(self, path):
        """Columns: t, x_pred_*, x_filt_*, sig_filt_* (diagonal), dY_norm, clipped."""
        p = self.model.p
        header = (["t"]
                  + [f"x_pred_{j + 1}" for j in range(p)]
                  + [f"x_filt_{j + 1}" for j in range(p)]
                  + [f"sig_filt_{j + 1}" for j in range(p)]
                  + ["dY_norm", "clipped"])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for s in self.states:
                dy = "" if s.missing or s.dY is None \
                    else repr(float(np.linalg.norm(s.dY)))
                row = ([s.t]
                       + [repr(float(v)) for v in s.x_pred]
                       + [repr(float(v)) for v in s.x_filt]
                       + [repr(float(v)) for v in np.diag(s.Sigma_filt)]
                       + [dy, int(s.clipped)])
                w.writerow(row)
        return path


def _b_sequence(variant, calibration, T):
    """Per-step clipping heights for a robust variant (None for classical)."""
    if not variant.robust:
        return None
    if variant.b is not None:
        return np.full(T, float(variant.b))
    if calibration is None:
        raise ValueError(f"variant {variant.label!r} has no fixed clipping height; "
                         "a calibration table is required")
    return np.array([calibration.b_at(t) for t in range(1, T + 1)], dtype=float)


def _normalize_obs(model, observations):
    ys = np.asarray(observations, dtype=float)
    if ys.ndim == 1:
        ys = ys[:, None]
    if ys.shape[1] != model.q:
        raise ValueError(f"observations must have {model.q} columns, got {ys.shape[1]}")
    missing = np.isnan(ys).any(axis=1)
    return ys, missing


def run_filter(model, observations, variant=CLASSICAL, calibration=None):
    """Run a filter over a full observation sequence.

    ``observations`` is (T, q) (or length-T for q = 1); rows containing NaN
    are treated as missing, in which case the correction step is skipped
    (x_filt = x_pred, Sigma_filt = Sigma_pred).  For nonlinear models the
    extended (linearized) recursion is used, with the same robust
    substitutions in the correction step.
    """
    if isinstance(model, NonlinearSSM):
        return _run_extended(model, observations, variant, calibration)
    ys, missing = _normalize_obs(model, observations)
    T = ys.shape[0]
    sched = gain_schedule(model, T, missing)
    b_seq = _b_sequence(variant, calibration, T)
    result = FilterResult(variant=variant, model=model, initial=initial_state(model))
    x = model.a0
    for t in range(1, T + 1):
        i = t - 1
        x_pred = sched.F[i] @ x
        if missing[i]:
            state = FilterState(
                t=t, x_pred=x_pred, Sigma_pred=sched.Sigma_pred[i],
                x_filt=x_pred, Sigma_filt=sched.Sigma_filt[i],
                K=sched.K[i], C=sched.C[i], dY=None,
                F=sched.F[i], Z=sched.Z[i], missing=True)
        else:
            dY = ys[i] - sched.Z[i] @ x_pred
            clipped = False
            if variant.kind == "classical":
                x_filt = x_pred + sched.K[i] @ dY
            elif variant.kind == "rls-ao":
                g = sched.K[i] @ dY
                h = huber_clip(g, b_seq[i], variant.norm)
                clipped = not np.array_equal(g, h)
                x_filt = x_pred + h
            else:
                w = sched.ImZK[i] @ dY
                h = huber_clip(w, b_seq[i], variant.norm)
                clipped = not np.array_equal(w, h)
                x_filt = x_pred + sched.Zsigma[i] @ (dY - h)
            state = FilterState(
                t=t, x_pred=x_pred, Sigma_pred=sched.Sigma_pred[i],
                x_filt=x_filt, Sigma_filt=sched.Sigma_filt[i],
                K=sched.K[i], C=sched.C[i], dY=dY,
                F=sched.F[i], Z=sched.Z[i], clipped=clipped)
        result.states.append(state)
        x = state.x_filt
    return result


def _run_extended(model, observations, variant, calibration):
    """Extended recursion: linearize f and z along the current estimates."""
    ys, missing = _normalize_obs(model, observations)
    T = ys.shape[0]
    b_seq = _b_sequence(variant, calibration, T)
    result = FilterResult(variant=variant, model=model, initial=initial_state(model))
    x, S = model.a0, model.Q0
    for t in range(1, T + 1):
        i = t - 1
        u, w_ctrl = model.u(t), model.w(t)
        Fj = np.asarray(model.jac_f_x(t, x, u, model.vbar), dtype=float)
        Bj = np.asarray(model.jac_f_v(t, x, u, model.vbar), dtype=float)
        x_pred = np.asarray(model.f(t, x, u, model.vbar), dtype=float)
        S_pred = clamp_psd(Fj @ S @ Fj.T + Bj @ model.Q(t) @ Bj.T,
                           what=f"prediction covariance at t={t}")
        Zj = np.asarray(model.jac_z_x(t, x_pred, w_ctrl, model.ebar), dtype=float)
        Dj = np.asarray(model.jac_z_e(t, x_pred, w_ctrl, model.ebar), dtype=float)
        C = symmetrize(Zj @ S_pred @ Zj.T + Dj @ model.V(t) @ Dj.T)
        K = S_pred @ Zj.T @ pseudo_inverse(C)
        if missing[i]:
            state = FilterState(t=t, x_pred=x_pred, Sigma_pred=S_pred,
                                x_filt=x_pred, Sigma_filt=S_pred,
                                K=K, C=C, dY=None, F=Fj, Z=Zj, missing=True)
        else:
            dY = ys[i] - np.asarray(model.z(t, x_pred, w_ctrl, model.ebar), dtype=float)
            clipped = False
            if variant.kind == "classical":
                x_filt = x_pred + K @ dY
            elif variant.kind == "rls-ao":
                g = K @ dY
                h = huber_clip(g, b_seq[i], variant.norm)
                clipped = not np.array_equal(g, h)
                x_filt = x_pred + h
            else:
                wv = (np.eye(model.q) - Zj @ K) @ dY
                h = huber_clip(wv, b_seq[i], variant.norm)
                clipped = not np.array_equal(wv, h)
                zsig = gen_inverse_bundle(Zj, S_pred).Zsigma
                x_filt = x_pred + zsig @ (dY - h)
            S_filt = clamp_psd((np.eye(model.p) - K @ Zj) @ S_pred,
                               what=f"filtering covariance at t={t}")
            state = FilterState(t=t, x_pred=x_pred, Sigma_pred=S_pred,
                                x_filt=x_filt, Sigma_filt=S_filt,
                                K=K, C=C, dY=dY, F=Fj, Z=Zj, clipped=clipped)
        result.states.append(state)
        x, S = state.x_filt, state.Sigma_filt
    return result


def run_filter_batch(sched, ys, variant, b_seq=None):
    """Vectorized x-recursion over a batch of observation sequences.

    ``ys`` is (n, T, q) with no missing entries; the schedule carries all
    covariance-level quantities.  Returns (x_pred, x_filt), each (n, T, p).
    Produces exactly the per-trajectory :func:`run_filter` states, replication
    by replication.
    """
    n, T, q = ys.shape
    p = sched.model.p
    x = np.broadcast_to(sched.model.a0, (n, p)).copy()
    x_pred = np.empty((n, T, p))
    x_filt = np.empty((n, T, p))
    for i in range(T):
        xp = x @ sched.F[i].T
        dY = ys[:, i, :] - xp @ sched.Z[i].T
        if variant.kind == "classical":
            corr = dY @ sched.K[i].T
        elif variant.kind == "rls-ao":
            corr = huber_clip_rows(dY @ sched.K[i].T, b_seq[i], variant.norm)
        else:
            h = huber_clip_rows(dY @ sched.ImZK[i].T, b_seq[i], variant.norm)
            corr = (dY - h) @ sched.Zsigma[i].T
        x = xp + corr
        x_pred[:, i] = xp
        x_filt[:, i] = x
    return x_pred, x_filt

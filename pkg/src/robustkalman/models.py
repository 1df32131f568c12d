"""Linear and nonlinear state-space model descriptions plus ideal-model simulation.

Conventions: the state sequence is x_0 (initial), x_1, ..., x_T; the
transition at step t maps x_{t-1} to x_t; time-varying ingredients are
functions of the 1-based step t.  Constant matrices may be passed directly
and are wrapped internally.

The ideal model is   x_t = F_t x_{t-1} + v_t,   y_t = Z_t x_t + e_t   with
v_t ~ N(0, Q_t), e_t ~ N(0, V_t) independent and x_0 ~ N(a0, Q0).  All
covariances may be singular; Gaussian sampling goes through the symmetric
matrix square root, never a Cholesky factor.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModelError
from .linalg import clamp_psd, symmetric_sqrt
from .rng import as_seedseq, rng_at


def _as_matrix_fn(m, rows, cols, name):
    """Wrap a constant matrix as a function of t; pass callables through."""
    if callable(m):
        return m, None
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.shape != (rows, cols):
        raise InvalidModelError(f"{name} must have shape {(rows, cols)}, got {m.shape}")
    return (lambda t, _m=m: _m), m


class LinearSSM:
    """Linear (possibly time-varying) Gaussian state-space model.

    F, Z, Q, V may be constant arrays or functions of the 1-based step t
    returning (p,p), (q,p), (p,p) and (q,q) matrices respectively.
    """

    def __init__(self, F, Z, Q, V, a0, Q0, p=None, q=None, preset=None):
        a0 = np.atleast_1d(np.asarray(a0, dtype=float))
        if p is None:
            p = a0.shape[0]
        if q is None:
            if callable(Z):
                raise InvalidModelError("q must be given when Z is a callable")
            q = np.atleast_2d(np.asarray(Z)).shape[0]
        self.p, self.q = int(p), int(q)
        if a0.shape != (self.p,):
            raise InvalidModelError(f"a0 must have shape ({self.p},), got {a0.shape}")
        self.a0 = a0
        self.Q0 = clamp_psd(np.atleast_2d(np.asarray(Q0, dtype=float)), what="Q0")
        if self.Q0.shape != (self.p, self.p):
            raise InvalidModelError(f"Q0 must be {self.p}x{self.p}")
        self.F, self._F_const = _as_matrix_fn(F, self.p, self.p, "F")
        self.Z, self._Z_const = _as_matrix_fn(Z, self.q, self.p, "Z")
        self.Q, self._Q_const = _as_matrix_fn(Q, self.p, self.p, "Q")
        self.V, self._V_const = _as_matrix_fn(V, self.q, self.q, "V")
        self.preset = preset

    @property
    def time_invariant(self):
        return all(m is not None for m in
                   (self._F_const, self._Z_const, self._Q_const, self._V_const))

    def constant_matrices(self):
        """(F, Z, Q, V) when time-invariant, else None."""
        if not self.time_invariant:
            return None
        return self._F_const, self._Z_const, self._Q_const, self._V_const

    def __repr__(self):
        tag = f", preset={self.preset[0]!r}" if self.preset else ""
        return f"LinearSSM(p={self.p}, q={self.q}{tag})"


def _zero_vec(n):
    return np.zeros(n)


class NonlinearSSM:
    """Nonlinear SSM  x_t = f(t, x_{t-1}, u_t, v_t),  y_t = z(t, x_t, w_t, e_t).

    ``f`` and ``z`` must accept the 1-based step, the state, a control (may be
    None) and the noise vector.  Jacobians are optional; missing ones fall
    back to central finite differences.  ``vbar`` / ``ebar`` are the noise
    means used both for linearization and (as offsets) for simulation.
    """

    def __init__(self, f, z, Q, V, a0, Q0, p, q, dim_v=None, dim_e=None,
                 jac_f_x=None, jac_f_v=None, jac_z_x=None, jac_z_e=None,
                 vbar=None, ebar=None, u=None, w=None, preset=None):
        self.p, self.q = int(p), int(q)
        self.dim_v = int(dim_v) if dim_v is not None else self.p
        self.dim_e = int(dim_e) if dim_e is not None else self.q
        self.f, self.z = f, z
        self.a0 = np.atleast_1d(np.asarray(a0, dtype=float))
        self.Q0 = clamp_psd(np.atleast_2d(np.asarray(Q0, dtype=float)), what="Q0")
        self.Q, _ = _as_matrix_fn(Q, self.dim_v, self.dim_v, "Q")
        self.V, _ = _as_matrix_fn(V, self.dim_e, self.dim_e, "V")
        self.vbar = np.zeros(self.dim_v) if vbar is None else np.asarray(vbar, dtype=float)
        self.ebar = np.zeros(self.dim_e) if ebar is None else np.asarray(ebar, dtype=float)
        self.u = u if u is not None else (lambda t: None)
        self.w = w if w is not None else (lambda t: None)
        self.jac_f_x = jac_f_x or self._fd(self.f, "x")
        self.jac_f_v = jac_f_v or self._fd(self.f, "v")
        self.jac_z_x = jac_z_x or self._fd(self.z, "x")
        self.jac_z_e = jac_z_e or self._fd(self.z, "e")
        self.preset = preset

    @staticmethod
    def _fd(fn, wrt):
        """Central finite-difference Jacobian of fn w.r.t. the state or noise."""
        def jac(t, x, ctrl, noise):
            base = np.asarray(x if wrt == "x" else noise, dtype=float)
            h = 1e-6 * (1.0 + np.linalg.norm(base))
            cols = []
            for j in range(base.shape[0]):
                dp = base.copy(); dp[j] += h
                dm = base.copy(); dm[j] -= h
                if wrt == "x":
                    hi, lo = fn(t, dp, ctrl, noise), fn(t, dm, ctrl, noise)
                else:
                    hi, lo = fn(t, x, ctrl, dp), fn(t, x, ctrl, dm)
                cols.append((np.asarray(hi) - np.asarray(lo)) / (2.0 * h))
            return np.column_stack(cols)
        return jac

    @classmethod
    def from_linear(cls, lin):
        """Wrap a LinearSSM so it can run through the extended-filter path."""
        def f(t, x, u, v):
            return lin.F(t) @ x + v

        def z(t, x, w, e):
            return lin.Z(t) @ x + e

        return cls(
            f, z, lin.Q, lin.V, lin.a0, lin.Q0, lin.p, lin.q,
            jac_f_x=lambda t, x, u, v: lin.F(t),
            jac_f_v=lambda t, x, u, v: np.eye(lin.p),
            jac_z_x=lambda t, x, w, e: lin.Z(t),
            jac_z_e=lambda t, x, w, e: np.eye(lin.q),
        )

    def __repr__(self):
        tag = f", preset={self.preset[0]!r}" if self.preset else ""
        return f"NonlinearSSM(p={self.p}, q={self.q}{tag})"


@dataclass
class Trajectory:
    """Paired ideal and realized state/observation paths with outlier indicators.

    States are indexed 1..T in the arrays; the initial state x_0 is stored
    separately.  When no contamination fired, the realized arrays equal the
    ideal ones elementwise (they share the same noise draws).
    """

    x0_ideal: np.ndarray
    x0_real: np.ndarray
    x_ideal: np.ndarray   # (T, p)
    y_ideal: np.ndarray   # (T, q)
    x_real: np.ndarray    # (T, p)
    y_real: np.ndarray    # (T, q)
    io_hits: np.ndarray = field(default=None)   # (T,) bool, state substituted at t
    ao_hits: np.ndarray = field(default=None)   # (T,) bool, observation substituted at t

    def __post_init__(self):
        T = self.x_ideal.shape[0]
        if self.io_hits is None:
            self.io_hits = np.zeros(T, dtype=bool)
        if self.ao_hits is None:
            self.ao_hits = np.zeros(T, dtype=bool)
        for name in ("y_ideal", "x_real", "y_real", "io_hits", "ao_hits"):
            if getattr(self, name).shape[0] != T:
                raise ValueError(f"{name} must have length {T}")

    @property
    def horizon(self):
        return self.x_ideal.shape[0]


def noise_transforms(model, T):
    """Symmetric square roots (sqrt_Q0, sqrt_Q (T,dv,dv), sqrt_V (T,de,de)).

    Computed once per (model, horizon) and shared across replications; all
    Gaussian sampling multiplies raw standard normals by these factors, which
    keeps singular covariances (degenerate Gaussians) unproblematic.
    """
    sq0 = symmetric_sqrt(model.Q0)
    sqQ = np.stack([symmetric_sqrt(model.Q(t)) for t in range(1, T + 1)])
    sqV = np.stack([symmetric_sqrt(model.V(t)) for t in range(1, T + 1)])
    return sq0, sqQ, sqV


def draw_ideal_noise(model, T, rng, transforms=None):
    """Standard building block: (x0, v (T, dv), e (T, de)) for one trajectory.

    Draw order is fixed (x0 block, then all innovations, then all observation
    errors) so that replications and batched simulators agree bit for bit.
    """
    sq0, sqQ, sqV = transforms if transforms is not None else noise_transforms(model, T)
    x0 = model.a0 + sq0 @ rng.standard_normal(model.p)
    dv = getattr(model, "dim_v", model.p)
    de = getattr(model, "dim_e", model.q)
    vn = rng.standard_normal((T, dv))
    en = rng.standard_normal((T, de))
    v = np.einsum("tij,tj->ti", sqQ, vn)
    e = np.einsum("tij,tj->ti", sqV, en)
    if isinstance(model, NonlinearSSM):
        v = v + model.vbar
        e = e + model.ebar
    return x0, v, e


def propagate_ideal(model, x0, v, e):
    """Run the state/observation recursions on given noise; returns (x, y)."""
    T = v.shape[0]
    x = np.empty((T, model.p))
    y = np.empty((T, model.q))
    prev = x0
    if isinstance(model, NonlinearSSM):
        for i in range(T):
            t = i + 1
            prev = np.asarray(model.f(t, prev, model.u(t), v[i]), dtype=float)
            x[i] = prev
            y[i] = np.asarray(model.z(t, prev, model.w(t), e[i]), dtype=float)
    else:
        for i in range(T):
            t = i + 1
            prev = model.F(t) @ prev + v[i]
            x[i] = prev
            y[i] = model.Z(t) @ prev + e[i]
    return x, y


def simulate_ideal(model, T, seed=0):
    """Simulate one trajectory from the ideal (uncontaminated) model.

    Deterministic given the seed.  Uses the same substream layout as the
    contaminated simulator, so a contaminated run with zero radii reproduces
    this trajectory exactly.
    """
    if T < 1:
        raise ValueError("horizon must be at least 1")
    rng = rng_at(as_seedseq(seed), 0)
    x0, v, e = draw_ideal_noise(model, T, rng)
    x, y = propagate_ideal(model, x0, v, e)
    return Trajectory(x0_ideal=x0, x0_real=x0.copy(),
                      x_ideal=x, y_ideal=y,
                      x_real=x.copy(), y_real=y.copy())


@dataclass
class JacobianReport:
    """Outcome of comparing analytic Jacobians against finite differences."""

    max_rel_dev: dict
    tol: float

    @property
    def passed(self):
        return all(v < self.tol for v in self.max_rel_dev.values())


def jacobian_check(model, x, t=1, tol=1e-4):
    """Compare a nonlinear model's Jacobians against central finite differences.

    Report-only: never raises on disagreement.  The step size is
    ``1e-6 * (1 + |x|)`` around the supplied state and the noise means.
    """
    if not isinstance(model, NonlinearSSM):
        raise ValueError("jacobian_check applies to nonlinear models")
    x = np.asarray(x, dtype=float)
    u, w = model.u(t), model.w(t)
    pairs = {
        "f_x": (model.jac_f_x, NonlinearSSM._fd(model.f, "x"), u, model.vbar),
        "f_v": (model.jac_f_v, NonlinearSSM._fd(model.f, "v"), u, model.vbar),
        "z_x": (model.jac_z_x, NonlinearSSM._fd(model.z, "x"), w, model.ebar),
        "z_e": (model.jac_z_e, NonlinearSSM._fd(model.z, "e"), w, model.ebar),
    }
    devs = {}
    for name, (jac, fd, ctrl, noise) in pairs.items():
        a = np.asarray(jac(t, x, ctrl, noise), dtype=float)
        b = np.asarray(fd(t, x, ctrl, noise), dtype=float)
        devs[name] = float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a))))
    return JacobianReport(max_rel_dev=devs, tol=tol)

"""Outlier generators: substitutive observation outliers, propagating state
outliers, contaminated-normal mixtures, Cauchy draws, and block signals.

Two substitution layers, applied in this order:

* state layer (propagating): the state propagated from the contaminated past
  is replaced by a contaminating draw with probability ``r_io`` at each step;
  observation noise is suppressed (pinned at its mean) on substituted steps,
  and the substituted value feeds the next transition, so these outliers
  propagate;
* observation layer (non-propagating): the resulting observation is replaced
  wholesale by a contaminating draw with probability ``r_ao``, independently
  of everything else.

An ideal twin trajectory built from the *same* noise draws is returned
alongside, so reconstruction errors isolate the contamination effect; with
both radii zero the twin and the realized path coincide bit for bit.

A ``BlockSignal`` used as the state contaminant is the endogenous special
case: the first state coordinate is overwritten at every step by a piecewise
constant signal with geometrically distributed segment lengths and Gaussian
levels, observation noise stays on, and the overwritten values propagate.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModelError
from .linalg import symmetric_sqrt
from .models import (NonlinearSSM, Trajectory, draw_ideal_noise,
                     noise_transforms)
from .rng import as_seedseq, rng_at, substream


@dataclass(frozen=True)
class PointMass:
    """Degenerate contaminant: every draw equals ``value``."""

    value: object

    def sample(self, rng, n, dim):
        v = np.broadcast_to(np.asarray(self.value, dtype=float), (dim,))
        return np.tile(v, (n, 1))


@dataclass(frozen=True)
class GaussianDist:
    """Gaussian contaminant N(mean, cov); cov may be singular."""

    mean: object
    cov: object

    def sample(self, rng, n, dim):
        mean = np.broadcast_to(np.asarray(self.mean, dtype=float), (dim,))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (dim, dim):
            raise InvalidModelError(f"contaminant covariance must be {dim}x{dim}")
        return mean + rng.standard_normal((n, dim)) @ symmetric_sqrt(cov).T


@dataclass(frozen=True)
class CauchyDist:
    """Coordinatewise independent Cauchy(loc, scale) draws."""

    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not np.all(np.asarray(self.scale) > 0):
            raise InvalidModelError("Cauchy scale must be positive")

    def sample(self, rng, n, dim):
        loc = np.broadcast_to(np.asarray(self.loc, dtype=float), (dim,))
        scale = np.broadcast_to(np.asarray(self.scale, dtype=float), (dim,))
        return loc + scale * rng.standard_cauchy((n, dim))


@dataclass(frozen=True)
class MultivariateCauchy:
    """Elliptical Cauchy: center + (Gaussian with the given shape) / |N(0,1)|.

    The shape matrix may be singular, in which case the corresponding
    coordinates are pinned at the center.
    """

    center: object
    shape: object

    def sample(self, rng, n, dim):
        center = np.broadcast_to(np.asarray(self.center, dtype=float), (dim,))
        shape = np.atleast_2d(np.asarray(self.shape, dtype=float))
        if shape.shape != (dim, dim):
            raise InvalidModelError(f"contaminant shape matrix must be {dim}x{dim}")
        g = rng.standard_normal((n, dim)) @ symmetric_sqrt(shape).T
        s = np.abs(rng.standard_normal((n, 1)))
        return center + g / s


@dataclass(frozen=True)
class BlockSignal:
    """Piecewise-constant artificial signal substituted into the state.

    Segment lengths are geometric with the given mean duration, levels are
    i.i.d. N(0, amplitude_scale^2).
    """

    mean_duration: float
    amplitude_scale: float

    def __post_init__(self):
        if not self.mean_duration >= 1:
            raise InvalidModelError("mean segment duration must be >= 1")

    def draw(self, rng, T):
        out = np.empty(T)
        i = 0
        while i < T:
            length = int(rng.geometric(1.0 / self.mean_duration))
            level = self.amplitude_scale * rng.standard_normal()
            out[i:i + length] = level
            i += length
        return out


def block_signal(T, mean_duration, amplitude_scale, seed=0):
    """Standalone draw of a block signal of length T; deterministic given seed."""
    return BlockSignal(mean_duration, amplitude_scale).draw(rng_at(seed), T)


@dataclass(frozen=True)
class ContaminationSpec:
    """Radii and contaminating distributions for both outlier layers.

    ``r_io`` is the per-step probability of substituting the state (ignored
    when the state contaminant is a BlockSignal, which substitutes every
    step); ``r_ao`` the per-step probability of substituting the observation.
    """

    r_ao: float = 0.0
    r_io: float = 0.0
    dist_ao: object = None
    dist_io: object = None

    def __post_init__(self):
        for name, r in (("r_ao", self.r_ao), ("r_io", self.r_io)):
            if not 0.0 <= r <= 1.0:
                raise InvalidModelError(f"{name} must lie in [0, 1], got {r!r}")

    @property
    def io_active(self):
        return isinstance(self.dist_io, BlockSignal) or \
            (self.r_io > 0 and self.dist_io is not None)

    @property
    def ao_active(self):
        return self.r_ao > 0 and self.dist_ao is not None


_NO_CONTAMINATION = ContaminationSpec()


def _draw_blocks(model, T, spec, seed, transforms):
    """All random draws for one replication, in a fixed substream layout.

    Substream 0: process/observation noise; 1: state-outlier layer
    (indicators, then contaminating values); 2: observation-outlier layer.
    """
    ss = as_seedseq(seed)
    x0, v, e = draw_ideal_noise(model, T, rng_at(ss, 0), transforms)
    blocks = {"x0": x0, "v": v, "e": e, "uio": None, "xdi": None,
              "uao": None, "ydi": None, "block": None}
    if spec.io_active:
        io_rng = rng_at(ss, 1)
        if isinstance(spec.dist_io, BlockSignal):
            blocks["block"] = spec.dist_io.draw(io_rng, T)
            blocks["uio"] = np.ones(T, dtype=bool)
        else:
            blocks["uio"] = io_rng.random(T) < spec.r_io
            blocks["xdi"] = spec.dist_io.sample(io_rng, T, model.p)
    if spec.ao_active:
        ao_rng = rng_at(ss, 2)
        blocks["uao"] = ao_rng.random(T) < spec.r_ao
        blocks["ydi"] = spec.dist_ao.sample(ao_rng, T, model.q)
    return blocks


def _assemble_linear(model, T, spec, blocks):
    """Vectorized twin propagation for a batch of replications."""
    n = blocks["x0"].shape[0]
    p, q = model.p, model.q
    x0, v, e = blocks["x0"], blocks["v"], blocks["e"]
    x_id = np.empty((n, T, p))
    y_id = np.empty((n, T, q))
    prev = x0
    Fs = [model.F(t) for t in range(1, T + 1)]
    Zs = [model.Z(t) for t in range(1, T + 1)]
    for i in range(T):
        prev = prev @ Fs[i].T + v[:, i]
        x_id[:, i] = prev
        y_id[:, i] = prev @ Zs[i].T + e[:, i]
    if not (spec.io_active or spec.ao_active):
        return x_id, y_id, x_id.copy(), y_id.copy(), \
            np.zeros((n, T), dtype=bool), np.zeros((n, T), dtype=bool)

    x_re = np.empty((n, T, p))
    y_re = np.empty((n, T, q))
    io_hits = blocks["uio"] if blocks["uio"] is not None else np.zeros((n, T), dtype=bool)
    ao_hits = blocks["uao"] if blocks["uao"] is not None else np.zeros((n, T), dtype=bool)
    is_block = blocks["block"] is not None
    prev = x0.copy()
    for i in range(T):
        xt = prev @ Fs[i].T + v[:, i]
        if is_block:
            xt = xt.copy()
            xt[:, 0] = blocks["block"][:, i]
            x_re[:, i] = xt
            y_re[:, i] = xt @ Zs[i].T + e[:, i]
        elif spec.io_active:
            m = io_hits[:, i][:, None]
            x_re[:, i] = np.where(m, blocks["xdi"][:, i], xt)
            # observation error suppressed on substituted steps
            y_re[:, i] = x_re[:, i] @ Zs[i].T + np.where(m, 0.0, e[:, i])
        else:
            x_re[:, i] = xt
            y_re[:, i] = xt @ Zs[i].T + e[:, i]
        if spec.ao_active:
            m = ao_hits[:, i][:, None]
            y_re[:, i] = np.where(m, blocks["ydi"][:, i], y_re[:, i])
        prev = x_re[:, i]
    return x_id, y_id, x_re, y_re, io_hits, ao_hits


def _assemble_nonlinear_one(model, T, spec, blocks):
    """Twin propagation for one replication of a nonlinear model."""
    x0, v, e = blocks["x0"], blocks["v"], blocks["e"]
    p, q = model.p, model.q
    x_id = np.empty((T, p)); y_id = np.empty((T, q))
    x_re = np.empty((T, p)); y_re = np.empty((T, q))
    io_hits = blocks["uio"] if blocks["uio"] is not None else np.zeros(T, dtype=bool)
    ao_hits = blocks["uao"] if blocks["uao"] is not None else np.zeros(T, dtype=bool)
    is_block = blocks["block"] is not None
    prev_id = x0
    prev_re = x0.copy()
    for i in range(T):
        t = i + 1
        u, w = model.u(t), model.w(t)
        prev_id = np.asarray(model.f(t, prev_id, u, v[i]), dtype=float)
        x_id[i] = prev_id
        y_id[i] = np.asarray(model.z(t, prev_id, w, e[i]), dtype=float)
        xt = np.asarray(model.f(t, prev_re, u, v[i]), dtype=float)
        eff_e = e[i]
        if is_block:
            xt = xt.copy()
            xt[0] = blocks["block"][i]
        elif spec.io_active and io_hits[i]:
            xt = blocks["xdi"][i]
            eff_e = model.ebar  # noise suppressed: error pinned at its mean
        x_re[i] = xt
        y_re[i] = np.asarray(model.z(t, xt, w, eff_e), dtype=float)
        if spec.ao_active and ao_hits[i]:
            y_re[i] = blocks["ydi"][i]
        prev_re = xt
    return x_id, y_id, x_re, y_re, io_hits, ao_hits


@dataclass
class BatchTrajectories:
    """Stacked replications: leading axis is the replication index."""

    x0: np.ndarray        # (n, p)
    x_ideal: np.ndarray   # (n, T, p)
    y_ideal: np.ndarray   # (n, T, q)
    x_real: np.ndarray
    y_real: np.ndarray
    io_hits: np.ndarray   # (n, T) bool
    ao_hits: np.ndarray

    @property
    def n_runs(self):
        return self.x0.shape[0]

    def trajectory(self, i):
        return Trajectory(
            x0_ideal=self.x0[i], x0_real=self.x0[i].copy(),
            x_ideal=self.x_ideal[i], y_ideal=self.y_ideal[i],
            x_real=self.x_real[i], y_real=self.y_real[i],
            io_hits=self.io_hits[i], ao_hits=self.ao_hits[i])


def simulate_span(model, T, spec, seeds):
    """Batch of trajectories, one per seed in ``seeds`` (ints or SeedSequences)."""
    spec = spec if spec is not None else _NO_CONTAMINATION
    transforms = noise_transforms(model, T)
    blocks = [_draw_blocks(model, T, spec, s, transforms) for s in seeds]

    def stack(key):
        if blocks[0][key] is None:
            return None
        return np.stack([b[key] for b in blocks])

    stacked = {k: stack(k) for k in blocks[0]}
    if isinstance(model, NonlinearSSM):
        outs = [_assemble_nonlinear_one(model, T, spec, b) for b in blocks]
        parts = [np.stack([o[j] for o in outs]) for j in range(6)]
    else:
        parts = _assemble_linear(model, T, spec, stacked)
    x_id, y_id, x_re, y_re, io_hits, ao_hits = parts
    return BatchTrajectories(x0=stacked["x0"], x_ideal=x_id, y_ideal=y_id,
                             x_real=x_re, y_real=y_re,
                             io_hits=io_hits, ao_hits=ao_hits)


def simulate_replications(model, T, spec, seed, n_runs):
    """n_runs independent contaminated trajectories with per-replication seeding.

    Replication i uses the substream ``(seed, i)``, so any slice of the batch
    can be regenerated independently and the result does not depend on how
    replications are chunked across workers.  ``spec=None`` means no
    contamination.
    """
    ss = as_seedseq(seed)
    return simulate_span(model, T, spec,
                         [substream(ss, i) for i in range(n_runs)])


def simulate_contaminated(model, T, spec, seed=0):
    """One contaminated trajectory plus its ideal twin (shared noise draws).

    The state layer substitutes with probability ``r_io`` per step and
    propagates; the observation layer then substitutes with probability
    ``r_ao``.  Deterministic given the seed; with both layers inactive the
    result equals :func:`robustkalman.models.simulate_ideal` for the same seed.
    """
    if T < 1:
        raise ValueError("horizon must be at least 1")
    spec = spec if spec is not None else _NO_CONTAMINATION
    transforms = noise_transforms(model, T)
    blocks = _draw_blocks(model, T, spec, as_seedseq(seed), transforms)
    if isinstance(model, NonlinearSSM):
        parts = _assemble_nonlinear_one(model, T, spec, blocks)
    else:
        stacked = {k: (None if v is None else v[None, ...])
                   for k, v in blocks.items()}
        parts = [None if a is None else a[0]
                 for a in _assemble_linear(model, T, spec, stacked)]
    x_id, y_id, x_re, y_re, io_hits, ao_hits = parts
    return Trajectory(x0_ideal=blocks["x0"], x0_real=blocks["x0"].copy(),
                      x_ideal=x_id, y_ideal=y_id, x_real=x_re, y_real=y_re,
                      io_hits=io_hits, ao_hits=ao_hits)


def draw_contaminated_normal(r, R, mu_c, R_c, n, seed=0):
    """n draws from the mixture (1-r) N(0, R) + r N(mu_c, R_c).

    The classical (non-substitutive) way of contaminating a noise
    distribution; useful for feeding contaminated innovations or observation
    errors directly into a simulation.
    """
    if not 0.0 <= r <= 1.0:
        raise InvalidModelError(f"mixture weight must lie in [0, 1], got {r!r}")
    R = np.atleast_2d(np.asarray(R, dtype=float))
    R_c = np.atleast_2d(np.asarray(R_c, dtype=float))
    mu_c = np.atleast_1d(np.asarray(mu_c, dtype=float))
    d = R.shape[0]
    rng = rng_at(seed)
    pick = rng.random(n) < r
    base = rng.standard_normal((n, d)) @ symmetric_sqrt(R).T
    cont = mu_c + rng.standard_normal((n, d)) @ symmetric_sqrt(R_c).T
    return np.where(pick[:, None], cont, base)

"""Clipping-height calibration: choose b per time step by Monte Carlo plus
bracketed root finding.

Two criteria are supported.  With contamination radius r in (0, 1), the
radius criterion solves

    (1 - r) E (|g| - b)_+  =  r b

for the norm of the clipped argument g under the ideal model; this balances
the expected clipped-away mass against the outlier budget and yields the
minimax-MSE choice for the substitutive-outlier neighborhood of radius r.
The efficiency criterion instead fixes the premium delta paid in the ideal
model,

    E |dx - clipped correction|^2  =  (1 + delta) E |dx - linear correction|^2,

which may be unattainable when even ignoring the observation entirely costs
less than (1 + delta); that case is reported as degenerate.

The clipped argument is K dY for the clipped-correction filter (rls-ao) and
(I - Z K) dY for the tracking filter (rls-io); both are zero-mean Gaussians
under the ideal model with covariances available from the gain schedule, so
calibration never touches data.  Sampling is done once per step and reused
across all bisection iterates, making the solve deterministic given the seed.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .filters import gain_schedule
from .linalg import huber_clip_rows, symmetric_sqrt, symmetrize
from .rng import as_seedseq, rng_at, substream

BRACKET_LO = 1e-8
BRACKET_HI = 1e8
REL_TOL = 1e-6


@dataclass
class CalibrationTable:
    """Per-step clipping heights plus the criterion that produced them.

    ``b`` covers steps 1..len(b); later steps reuse the last entry (the
    schedule has reached its steady state by then, so the height is frozen).
    """

    variant: str              # "ao" | "io"
    criterion: str            # "radius" | "efficiency"
    value: float              # the radius r or the premium delta
    b: list
    steady_state_index: int = None
    mc_size: int = 0
    seed: int = 0
    degenerate: bool = False

    def b_at(self, t):
        if t < 1:
            raise ValueError("steps are 1-based")
        return self.b[min(t, len(self.b)) - 1]

    def to_dict(self):
        return {"variant": self.variant, "criterion": self.criterion,
                "value": self.value, "b": list(map(float, self.b)),
                "steady_state_index": self.steady_state_index,
                "mc_size": self.mc_size, "seed": self.seed,
                "degenerate": self.degenerate}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
        return path

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _norms(samples, norm):
    if norm is None:
        return np.linalg.norm(samples, axis=1)
    nsq = np.einsum("ij,jk,ik->i", samples, norm.Dminus, samples)
    return np.sqrt(np.maximum(nsq, 0.0))


def _bisect(crit, lo, hi):
    # crit is positive at lo and negative at hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if crit(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= REL_TOL * hi:
            break
    return 0.5 * (lo + hi)


def solve_radius_b(cov, r, mc_size=200_000, seed=0, norm=None):
    """Clipping height solving the radius criterion for g ~ N(0, cov).

    Returns +inf for r = 0 and (degenerately) the lower bracket end for
    r = 1.  The empirical tail expectation is evaluated on sorted norms with
    suffix sums, so each bisection iterate costs O(log mc_size).
    """
    if not 0.0 <= r <= 1.0:
        raise ConfigError(f"contamination radius must lie in [0, 1], got {r!r}")
    if r == 0.0:
        return math.inf
    cov = symmetrize(np.atleast_2d(cov))
    root = symmetric_sqrt(cov)
    rng = rng_at(as_seedseq(seed))
    g = rng.standard_normal((mc_size, cov.shape[0])) @ root.T
    ns = np.sort(_norms(g, norm))
    if ns[-1] == 0.0:
        return math.inf  # nothing to clip
    suffix = np.concatenate([np.cumsum(ns[::-1])[::-1], [0.0]])
    n_total = ns.shape[0]

    def crit(b):
        i = np.searchsorted(ns, b, side="right")
        tail = (suffix[i] - b * (n_total - i)) / n_total
        return (1.0 - r) * tail - r * b

    lo, hi = BRACKET_LO * ns[-1], BRACKET_HI * ns[-1]
    if crit(lo) <= 0.0:
        return lo  # r = 1 or a degenerate spectrum: any mass is too much
    return _bisect(crit, lo, hi)


def solve_efficiency_b(Sigma_pred, Z, V, K, delta, variant="ao",
                       Zsigma=None, mc_size=100_000, seed=0, norm=None):
    """Clipping height solving the efficiency criterion; (b, degenerate).

    Samples (dx, dy) jointly from the ideal one-step model and bisects on the
    premium equation using the same sample for every candidate b.  When even
    b -> 0 loses less than the requested premium, the criterion has no
    solution; the lower bracket end is returned with ``degenerate=True``.
    """
    if delta < 0:
        raise ConfigError(f"efficiency premium must be >= 0, got {delta!r}")
    if delta == 0:
        return math.inf, False
    Sigma_pred = symmetrize(np.atleast_2d(Sigma_pred))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    rng = rng_at(as_seedseq(seed))
    dx = rng.standard_normal((mc_size, Sigma_pred.shape[0])) @ symmetric_sqrt(Sigma_pred).T
    eps = rng.standard_normal((mc_size, V.shape[0])) @ symmetric_sqrt(V).T
    dy = dx @ Z.T + eps
    base = dx - dy @ K.T
    rhs = (1.0 + delta) * float(np.mean(np.einsum("ij,ij->i", base, base)))
    if variant == "ao":
        arg = dy @ K.T

        def corrected(b):
            return huber_clip_rows(arg, b, norm)
    elif variant == "io":
        if Zsigma is None:
            raise ValueError("Zsigma is required for the io variant")
        arg = dy @ (np.eye(Z.shape[0]) - Z @ K).T

        def corrected(b):
            return (dy - huber_clip_rows(arg, b, norm)) @ Zsigma.T
    else:
        raise ConfigError(f"variant must be 'ao' or 'io', got {variant!r}")

    scale = float(np.max(_norms(arg, norm)))
    if scale == 0.0:
        return math.inf, False

    def crit(b):
        resid = dx - corrected(b)
        return float(np.mean(np.einsum("ij,ij->i", resid, resid))) - rhs

    lo, hi = BRACKET_LO * scale, BRACKET_HI * scale
    if crit(lo) <= 0.0:
        return lo, True
    return _bisect(crit, lo, hi), False


def _clip_covariances(sched, variant, t_index):
    """Ideal-model covariance of the clipped argument at step index (0-based)."""
    K, C = sched.K[t_index], sched.C[t_index]
    if variant == "ao":
        return symmetrize(K @ C @ K.T)
    if variant == "io":
        ImZK = sched.ImZK[t_index]
        return symmetrize(ImZK @ C @ ImZK.T)
    raise ConfigError(f"variant must be 'ao' or 'io', got {variant!r}")


def calibrate_radius(model, variant, r, mc_size=200_000, seed=0, horizon=50,
                     norm=None):
    """Per-step clipping heights under the radius criterion.

    Calibration stops once the prediction covariance has reached its steady
    state (the height is frozen from there on); steps beyond the horizon
    reuse the last height.  Depends only on the model, never on data.
    """
    if not 0.0 <= r <= 1.0:
        raise ConfigError(f"contamination radius must lie in [0, 1], got {r!r}")
    if r == 0.0:
        return CalibrationTable(variant=variant, criterion="radius", value=r,
                                b=[math.inf], steady_state_index=1,
                                mc_size=mc_size, seed=_seed_id(seed))
    sched = gain_schedule(model, horizon)
    ss = as_seedseq(seed)
    bs = [solve_radius_b(_clip_covariances(sched, variant, i), r, mc_size,
                         substream(ss, i), norm)
          for i in range(_calibration_steps(sched))]
    return CalibrationTable(variant=variant, criterion="radius", value=r, b=bs,
                            steady_state_index=sched.steady_state_index,
                            mc_size=mc_size, seed=_seed_id(seed),
                            degenerate=(r == 1.0))


def calibrate_efficiency(model, variant, delta, mc_size=100_000, seed=0,
                         horizon=50, norm=None):
    """Per-step clipping heights under the efficiency criterion.

    A degenerate table (premium unattainable even when ignoring observations)
    keeps the boundary heights and sets the ``degenerate`` flag.
    """
    if delta < 0:
        raise ConfigError(f"efficiency premium must be >= 0, got {delta!r}")
    if delta == 0:
        return CalibrationTable(variant=variant, criterion="efficiency",
                                value=delta, b=[math.inf], steady_state_index=1,
                                mc_size=mc_size, seed=_seed_id(seed))
    sched = gain_schedule(model, horizon)
    ss = as_seedseq(seed)
    bs = []
    degenerate = False
    for i in range(_calibration_steps(sched)):
        b, degen = solve_efficiency_b(
            sched.Sigma_pred[i], sched.Z[i], sched.V[i], sched.K[i], delta,
            variant=variant, Zsigma=sched.Zsigma[i], mc_size=mc_size,
            seed=substream(ss, i), norm=norm)
        degenerate = degenerate or degen
        bs.append(b)
    return CalibrationTable(variant=variant, criterion="efficiency",
                            value=delta, b=bs,
                            steady_state_index=sched.steady_state_index,
                            mc_size=mc_size, seed=_seed_id(seed),
                            degenerate=degenerate)


def _calibration_steps(sched):
    """Calibrate up to (and including) the step where the schedule froze."""
    if sched.steady_state_index is None:
        return sched.T
    return sched.steady_state_index


def _seed_id(seed):
    ss = as_seedseq(seed)
    ent = ss.entropy
    if isinstance(ent, (list, tuple)):
        return int(ent[0]) if ent else 0
    return int(ent) if ent is not None else 0

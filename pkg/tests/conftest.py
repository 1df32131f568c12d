import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from robustkalman import InvalidModelError, LinearSSM, gain_schedule
from robustkalman.linalg import symmetrize


def random_psd(rng, n, rank=None, scale=1.0):
    """Random PSD matrix of the given rank (possibly singular)."""
    if rank == 0:
        return np.zeros((n, n))
    rank = rank if rank is not None else n
    g = rng.standard_normal((n, rank)) * scale
    return g @ g.T / max(rank, 1)


def random_model(rng, p=None, q=None, singular=True):
    """Random linear model; with singular=True it mixes in rank-deficient
    observation matrices and singular noise covariances."""
    p = int(p if p is not None else rng.integers(1, 4))
    q = int(q if q is not None else rng.integers(1, 4))
    F = 0.95 * rng.standard_normal((p, p)) / np.sqrt(p)
    Z = rng.standard_normal((q, p))
    if singular and q > 1 and rng.random() < 0.4:
        Z[rng.integers(q)] = 0.0
    if singular and min(p, q) > 1 and rng.random() < 0.3:
        Z = np.outer(rng.standard_normal(q), rng.standard_normal(p))
    draw_rank = lambda n: int(rng.integers(1, n + 1)) if singular else n
    Q = random_psd(rng, p, draw_rank(p))
    V = random_psd(rng, q, draw_rank(q))
    Q0 = np.zeros((p, p)) if (singular and rng.random() < 0.2) \
        else random_psd(rng, p, draw_rank(p))
    return LinearSSM(F=F, Z=Z, Q=Q, V=V, a0=rng.standard_normal(p), Q0=Q0)


def _spectrum_clean(mat, lo=1e-13, hi=1e-5):
    """No eigenvalue in the 'mushy' zone between clean-zero and clean-positive.

    Exactly singular covariances are fine (pseudo-inverses cut them off
    cleanly); eigenvalues a few orders above the cutoff are retained by the
    pseudo-inverse yet cannot be computed accurately by any floating-point
    route, so equality tests at 1e-8..1e-10 are meaningless there.
    """
    w = np.abs(np.linalg.eigvalsh(symmetrize(mat)))
    top = w.max()
    if top == 0.0:
        return True
    rel = w / top
    return not np.any((rel > lo) & (rel < hi))


def random_clean_model(rng, T=10, **kwargs):
    """Random (possibly singular) model whose filter spectra stay clean over T.

    Singular noise covariances make filtered variances decay geometrically,
    which mid-run passes through near-cutoff eigenvalue slivers; draws whose
    prediction or innovation covariances enter that zone are rejected so that
    tight-tolerance two-route comparisons stay well-posed.
    """
    while True:
        m = random_model(rng, **kwargs)
        try:
            sched = gain_schedule(m, T)
        except InvalidModelError:
            continue
        if all(_spectrum_clean(s) for s in sched.Sigma_pred) and \
                all(_spectrum_clean(c) for c in sched.C):
            return m


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)

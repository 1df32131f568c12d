"""Dense small-matrix primitives used throughout the filter recursions.

Everything here is tolerant of the rank deficiencies that routinely show up
in state-space work: singular noise covariances, non-square or rank-deficient
observation matrices, and covariances whose smallest eigenvalues drifted
slightly negative through accumulated roundoff.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidModelError

# Relative singular-value / eigenvalue cutoff for pseudo-inversion and roots.
SV_CUTOFF = 1e-12
# Relative tolerance below which a negative eigenvalue is treated as roundoff.
PSD_TOLERANCE = 1e-10


def symmetrize(m):
    """0.5 * (M + M')."""
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def pseudo_inverse(m, tol=SV_CUTOFF):
    """Moore-Penrose pseudoinverse with relative singular-value cutoff ``tol``.

    Singular values below ``tol`` times the largest one are treated as zero,
    so rank-deficient input is fine.  The result satisfies all four Penrose
    axioms up to roundoff.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("cannot invert a matrix with non-finite entries")
    if not 0.0 < tol < 1.0:
        raise ValueError(f"singular-value cutoff must lie in (0, 1), got {tol!r}")
    return np.linalg.pinv(m, rcond=tol)


def clamp_psd(s, tol=PSD_TOLERANCE, what="matrix"):
    """Return the PSD projection of a symmetric matrix, allowing only roundoff.

    Eigenvalues in ``[-tol * scale, 0)`` are clipped to zero; anything more
    negative raises :class:`InvalidModelError` because it signals a genuinely
    indefinite input rather than accumulated floating-point noise.
    """
    s = symmetrize(s)
    w, v = np.linalg.eigh(s)
    if w[0] >= 0.0:
        return s
    scale = max(w[-1], 0.0, 1.0)
    if w[0] < -tol * scale:
        raise InvalidModelError(
            f"{what} is not positive semi-definite "
            f"(min eigenvalue {w[0]:.3e}, max {w[-1]:.3e})")
    w = np.clip(w, 0.0, None)
    return symmetrize((v * w) @ v.T)


def symmetric_sqrt(s, tol=SV_CUTOFF):
    """Symmetric PSD square root R of S with R @ R = S.

    Eigenvalues below ``tol`` times the largest are mapped to zero, which
    makes singular covariances (and hence degenerate Gaussians) usable.
    """
    s = symmetrize(s)
    w, v = np.linalg.eigh(s)
    top = max(w[-1], 0.0)
    if w[0] < -PSD_TOLERANCE * max(top, 1.0):
        raise InvalidModelError(
            f"matrix has negative eigenvalue {w[0]:.3e} beyond tolerance")
    w = np.where(w > tol * top, w, 0.0)
    return symmetrize((v * np.sqrt(w)) @ v.T)


class SemiNorm:
    """Semi-norm ``|x|_D = sqrt(x' D^- x)`` generated by a PSD matrix D.

    ``Dminus`` is the cached pseudoinverse of D; directions in its kernel have
    length zero and are invisible to the norm.  Construct from either side:
    ``SemiNorm(d=...)`` or ``SemiNorm(dminus=...)`` when the pseudoinverse is
    the natural datum.
    """

    __slots__ = ("D", "Dminus")

    def __init__(self, d=None, dminus=None, tol=SV_CUTOFF):
        if (d is None) == (dminus is None):
            raise ValueError("give exactly one of d=, dminus=")
        if d is not None:
            self.D = clamp_psd(np.atleast_2d(d), what="seminorm matrix")
            self.Dminus = pseudo_inverse(self.D, tol)
        else:
            self.Dminus = clamp_psd(np.atleast_2d(dminus), what="seminorm matrix")
            self.D = pseudo_inverse(self.Dminus, tol)

    @property
    def dim(self):
        return self.D.shape[0]

    def norm_sq(self, x):
        return semi_norm_sq(x, self)

    def norm(self, x):
        return np.sqrt(semi_norm_sq(x, self))


def semi_norm_sq(x, sn):
    """``x' D^- x`` for the semi-norm ``sn``; tiny negative roundoff clamps to 0."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != sn.dim:
        raise ValueError(f"vector of length {x.shape[0]} does not match "
                         f"seminorm dimension {sn.dim}")
    return max(float(x @ sn.Dminus @ x), 0.0)


def huber_clip(x, b, norm=None):
    """Shrink x toward the origin so its norm does not exceed ``b``.

    Returns ``x * min(1, b / |x|)``: the direction of x is preserved, points
    inside the ball are untouched, and ``b = inf`` is the identity.  The norm
    is Euclidean unless a :class:`SemiNorm` is supplied.
    """
    _check_clip_height(b)
    x = np.asarray(x, dtype=float)
    if np.isinf(b):
        return x.copy()
    nrm = np.sqrt(semi_norm_sq(x, norm)) if norm is not None \
        else float(np.linalg.norm(x))
    if nrm <= b:
        return x.copy()
    return x * (b / nrm)


def huber_clip_rows(g, b, norm=None):
    """Row-wise :func:`huber_clip` of an (n, d) array, vectorized."""
    _check_clip_height(b)
    g = np.asarray(g, dtype=float)
    if np.isinf(b):
        return g
    if norm is None:
        nsq = np.einsum("ij,ij->i", g, g)
    else:
        nsq = np.maximum(np.einsum("ij,jk,ik->i", g, norm.Dminus, g), 0.0)
    n = np.sqrt(nsq)
    scale = np.ones_like(n)
    over = n > b
    scale[over] = b / n[over]
    return g * scale[:, None]


def _check_clip_height(b):
    if not b > 0:
        raise ValueError(f"clipping height must be positive, got {b!r}")


@dataclass(frozen=True)
class GenInvBundle:
    """Generalized inverse of an observation matrix Z adapted to a covariance.

    ``Zsigma`` (p x q) maps observation-space reconstructions back to state
    space; ``pi`` is the orthogonal projector onto the column space of
    Z Sigma Z' in observation space, and ``pi_bar`` its complement.
    """

    Zsigma: np.ndarray
    pi: np.ndarray
    pi_bar: np.ndarray


def gen_inverse_bundle(z, sigma, tol=SV_CUTOFF):
    """``Zsigma = Sigma Z' (Z Sigma Z')^-`` plus its projectors.

    Works for any rank of Z or Sigma.  Key identities (up to roundoff):
    ``pi`` is symmetric idempotent, ``Sigma Z' pi_bar = 0``, and
    ``Zsigma Z K = K`` for the gain ``K = Sigma Z' (Z Sigma Z' + V)^-``.

    Evaluated through the factor G = sqrt(Sigma) Z' rather than the Gram
    matrix Z Sigma Z' itself, which would square the condition number and
    lose the annihilation identity on near-rank-deficient input.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    q = z.shape[0]
    root = symmetric_sqrt(sigma, tol)
    g = root @ z.T                       # p x q, Z Sigma Z' = g' g
    g_pinv = pseudo_inverse(g, tol)      # q x p
    zsigma = root @ g_pinv.T
    pi = symmetrize(g_pinv @ g)          # projector onto the row space of g
    return GenInvBundle(Zsigma=zsigma, pi=pi, pi_bar=np.eye(q) - pi)


def observable_seminorm(z, sigma, tol=SV_CUTOFF):
    """State-space semi-norm that ignores directions invisible to Z.

    Generated by D with ``D^- = (Zsigma Z)' Sigma^- (Zsigma Z)``: components
    of the reconstruction error lying in the kernel of ``Zsigma Z`` (for
    example, state directions in the kernel of Z itself) have length zero,
    while every direction the optimal linear filter can see is kept.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    bundle = gen_inverse_bundle(z, sigma, tol)
    proj = bundle.Zsigma @ z
    dminus = symmetrize(proj.T @ pseudo_inverse(symmetrize(sigma), tol) @ proj)
    return SemiNorm(dminus=dminus)

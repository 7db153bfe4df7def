"""Simultaneous (PoSI) multipliers over all submodels of a design.

Every coefficient of every submodel is a linear contrast of ``y``.  In an
orthonormal basis of the column space these become unit vectors ``u`` in
``R^d``, and the simultaneous multiplier is the ``1 - alpha`` quantile of
``max_u |u^T Z| / R`` with ``Z ~ N(0, I_d)`` and ``R ~ sqrt(chi2_df / df)``.

Writing ``Z = |Z| v`` with ``v`` uniform on the sphere splits that statistic
into ``sqrt(d F) * c(v)``, where ``F ~ F(d, df)`` and
``c(v) = max_u |u^T v|``.  The default estimator draws only the directions
and averages the exact F distribution function over them, which is the
estimator used by the reference PoSI software.  The plain empirical
quantile of the max statistic is available as ``estimator="direct"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
from scipy.optimize import brentq
from scipy.special import chdtr, fdtr, fdtri, chdtri

from ..errors import ResourceLimitError
from .classical import OlsFit, SelectiveInterval, t_quantile

ENUMERATION_CAP = 20
CHUNK_ROWS = 20_000
DEFAULT_DRAWS = 1000
REALISTIC_DRAWS = 500


@dataclass(eq=False)
class PosiConstant:
    k: float
    alpha: float
    model_space: int
    n_mc: int
    df: float
    d: int = 0
    n_contrasts: int = 0
    max_inner: np.ndarray | None = field(default=None, repr=False)

    def scheffe(self):
        return scheffe_bound(self.d, self.df, self.alpha)

    def tail(self, t):
        """P(max-|t| statistic >= t) under the mixture representation."""
        if self.max_inner is None:
            raise ValueError("tail probabilities need the mixture estimator")
        return 1.0 - _mixture_cdf(t, self.max_inner, self.d, self.df)


def scheffe_bound(d, df, alpha):
    if np.isinf(df):
        return float(np.sqrt(chdtri(d, alpha)))
    return float(np.sqrt(d * fdtri(d, df, 1 - alpha)))


def _mixture_cdf(t, c, d, df):
    arg = t * t / (d * c * c)
    if np.isinf(df):
        return float(np.mean(chdtr(d, d * arg)))
    return float(np.mean(fdtr(d, df, arg)))


def _basis_factor(x):
    xc = np.asarray(x, dtype=float)
    xc = xc - xc.mean(axis=0)
    q, r = np.linalg.qr(xc, mode="reduced")
    diag = np.abs(np.diag(r))
    keep = diag > diag.max() * 1e-10
    if not keep.all():
        # rank-deficient design: project onto the retained directions
        u, s, vt = np.linalg.svd(xc, full_matrices=False)
        rank = int(np.sum(s > s.max() * 1e-10))
        r = s[:rank, None] * vt[:rank]
    return r


def submodel_contrasts(r, size):
    """Unit contrasts for every coefficient of every full-rank submodel of one size.

    ``r`` is the d x p coordinate matrix of the design in an orthonormal
    basis.  Returns an (n_contrasts, d) array.
    """
    p = r.shape[1]
    combos = np.array(list(combinations(range(p), size)), dtype=int)
    rm = np.transpose(r[:, combos], (1, 0, 2))            # (C, d, k)
    gram = np.einsum("cdi,cdj->cij", rm, rm)
    cond = np.linalg.cond(gram)
    ok = np.isfinite(cond) & (cond < 1e12)
    rm, gram = rm[ok], gram[ok]
    inv = np.linalg.inv(gram)
    u = rm @ inv                                          # (C, d, k)
    norms = np.sqrt(np.einsum("cii->ci", inv))
    u = u / norms[:, None, :]
    return np.transpose(u, (0, 2, 1)).reshape(-1, r.shape[0])


def _iter_contrasts(r, max_size):
    for size in range(1, max_size + 1):
        yield submodel_contrasts(r, size)


def _max_abs_inner(r, max_size, dirs):
    """For each column of ``dirs`` the largest |u^T v| over all contrasts."""
    out = np.zeros(dirs.shape[1])
    count = 0
    for u in _iter_contrasts(r, max_size):
        count += u.shape[0]
        for start in range(0, u.shape[0], CHUNK_ROWS):
            block = np.abs(u[start:start + CHUNK_ROWS] @ dirs)
            np.maximum(out, block.max(axis=0), out=out)
    return out, count


def posi_constant(x_std, alpha=0.1, max_size=None, df=np.inf, n_mc=DEFAULT_DRAWS, rng=None,
                  *, estimator="mixture") -> PosiConstant:
    """Monte-Carlo PoSI multiplier for the design ``x_std``.

    Parameters
    ----------
    x_std : (n, p) array
    alpha : float
        Family-wise error level.
    max_size : int, optional
        Largest submodel size considered.  Required when ``p`` exceeds
        ``ENUMERATION_CAP``.
    df : float
        Degrees of freedom of the variance estimate; ``np.inf`` for known
        variance.
    n_mc : int
        Number of Monte-Carlo draws (directions, or Gaussian vectors for the
        direct estimator).
    estimator : {"mixture", "direct"}
    """
    x = np.asarray(x_std, dtype=float)
    p = x.shape[1]
    if n_mc < 500:
        raise ValueError("n_mc must be >= 500")
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    if max_size is None:
        if p > ENUMERATION_CAP:
            raise ResourceLimitError(
                f"p = {p} gives {2 ** p - 1} submodels; pass max_size to limit the model space"
            )
        max_size = p
    max_size = int(min(max_size, p))
    rng = np.random.default_rng(rng)
    r = _basis_factor(x)
    d = r.shape[0]
    max_size = min(max_size, d)

    if estimator == "direct":
        z = rng.standard_normal((d, n_mc))
        if np.isinf(df):
            scale = np.ones(n_mc)
        else:
            scale = np.sqrt(rng.chisquare(df, n_mc) / df)
        inner, count = _max_abs_inner(r, max_size, z)
        k = float(np.quantile(inner / scale, 1 - alpha))
        return PosiConstant(k, alpha, max_size, n_mc, df, d, count)
    if estimator != "mixture":
        raise ValueError(f"unknown estimator {estimator!r}")

    dirs = rng.standard_normal((d, n_mc))
    dirs /= np.linalg.norm(dirs, axis=0)
    inner, count = _max_abs_inner(r, max_size, dirs)
    target = 1 - alpha
    hi = scheffe_bound(d, df, alpha) * (1 + 1e-12)
    f = lambda t: _mixture_cdf(t, inner, d, df) - target
    k = hi if f(hi) <= 0 else brentq(f, 1e-8, hi, xtol=1e-12)
    return PosiConstant(float(k), alpha, max_size, n_mc, df, d, count, inner)


def n_submodel_contrasts(p, max_size=None):
    max_size = p if max_size is None else min(max_size, p)
    return sum(k * comb(p, k) for k in range(1, max_size + 1))


def posi_ci(fit: OlsFit, k: PosiConstant, alpha=None, method="PoSI"):
    """Symmetric intervals ``estimate +/- K * SE`` with max-|t| p-values.

    A p-value of 1 means the coefficient is inside the simultaneous
    acceptance region; otherwise it is the probability that the max-|t|
    statistic exceeds the observed |t|, which is conservative for a single
    coefficient.
    """
    if alpha is not None and not np.isclose(alpha, k.alpha):
        raise ValueError("alpha differs from the level the constant was computed at")
    out = []
    for j, b, se in zip(fit.model, fit.coefficients, fit.std_errors):
        tval = abs(b) / se
        if tval <= k.k or k.max_inner is None:
            p_value = 1.0 if tval <= k.k else float("nan")
        else:
            p_value = float(np.clip(k.tail(tval), 0.0, 1.0))
        out.append(SelectiveInterval(
            variable=j, estimate=float(b), lower=float(b - k.k * se), upper=float(b + k.k * se),
            p_value=p_value, method=method,
        ))
    return out


def sandwich_holds(k: PosiConstant, tol=1e-9):
    """Check t-quantile <= K <= Scheffe bound."""
    low = t_quantile(k.df, 1 - k.alpha / 2)
    return low - tol <= k.k <= k.scheffe() + tol

"""Penalty selection: K-fold cross-validation or the fixed Negahban rule."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import ConfigurationError
from .lasso import CD_TOL, MAX_SWEEPS, _check_weights, _cd_path, lambda_path

NEGAHBAN_DRAWS = 1000


@dataclass(eq=False)
class TuningResult:
    method: str
    lam: float
    index: int | None = None
    lambdas: np.ndarray | None = None
    cv_mean: np.ndarray | None = None
    cv_se: np.ndarray | None = None

    def cv_curve(self):
        """Rows of (lambda, mean CV error, fold SE), or None for fixed rules."""
        if self.cv_mean is None:
            return None
        return np.column_stack([self.lambdas, self.cv_mean, self.cv_se])


def fold_indices(n, k, rng):
    return np.array_split(rng.permutation(n), k)


@numba.njit(cache=True)
def _fold_errors(x, y, fold_of, k, lambdas, weights, tol, max_sweeps):
    """Held-out mean squared error per (fold, lambda), warm-started paths."""
    n, p = x.shape
    err = np.zeros((k, lambdas.shape[0]))
    sizes = np.zeros(k)
    for f in range(k):
        n_train = 0
        for i in range(n):
            if fold_of[i] != f:
                n_train += 1
        xt = np.empty((n_train, p))
        yt = np.empty(n_train)
        r = 0
        for i in range(n):
            if fold_of[i] != f:
                xt[r] = x[i]
                yt[r] = y[i]
                r += 1
        xm = np.zeros(p)
        for j in range(p):
            xm[j] = xt[:, j].mean()
        ym = yt.mean()
        xt -= xm
        yt -= ym
        coefs = _cd_path(xt.T @ xt, xt.T @ yt, lambdas, weights, tol, max_sweeps)
        for i in range(n):
            if fold_of[i] == f:
                sizes[f] += 1
                xc = x[i] - xm
                for l in range(lambdas.shape[0]):
                    resid = y[i] - ym - xc @ coefs[l]
                    err[f, l] += resid * resid
        err[f] /= sizes[f]
    return err, sizes


def cv_lambda(x_std, y, weights=None, k=10, rng=None, *, lambdas=None, n_lambda=100):
    """Pick the penalty with minimal K-fold mean squared prediction error.

    Folds come from one random permutation cut into ``k`` near-equal
    blocks.  Ties go to the larger penalty.  ``weights`` stay fixed across
    folds.
    """
    x = np.asarray(x_std, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if k < 2 or n < 2 * k:
        raise ConfigurationError(f"{k}-fold CV needs k >= 2 and n >= 2k (n={n})")
    rng = np.random.default_rng(rng)
    if lambdas is None:
        lambdas = lambda_path(x, y, weights, n_lambda)
    lambdas = np.asarray(lambdas, dtype=float)

    fold_of = np.empty(n, dtype=np.int64)
    for f, test in enumerate(fold_indices(n, k, rng)):
        fold_of[test] = f
    w = _check_weights(weights, x.shape[1])
    fold_err, sizes = _fold_errors(x, y, fold_of, k, lambdas, w, CD_TOL, MAX_SWEEPS)

    cv_mean = sizes @ fold_err / sizes.sum()
    spread = sizes @ (fold_err - cv_mean) ** 2 / sizes.sum()
    cv_se = np.sqrt(spread / (k - 1))
    index = int(np.argmin(cv_mean))
    return TuningResult("CV", float(lambdas[index]), index, lambdas, cv_mean, cv_se)


def negahban_lambda(x_std, sigma_hat, n_mc=NEGAHBAN_DRAWS, rng=None):
    """Monte-Carlo estimate of ``2 E ||X^T eps||_inf`` with ``eps ~ N(0, sigma_hat^2 I)``."""
    if sigma_hat <= 0:
        raise ValueError("sigma_hat must be positive")
    if n_mc < 100:
        raise ValueError("n_mc must be >= 100")
    x = np.asarray(x_std, dtype=float)
    xc = x - x.mean(axis=0)
    rng = np.random.default_rng(rng)
    eps = rng.standard_normal((n_mc, x.shape[0]))
    sup = np.abs(eps @ xc).max(axis=1)
    return TuningResult("Neg", float(2.0 * sigma_hat * sup.mean()))

"""Gaussian Lasso and adaptive Lasso by cyclic coordinate descent.

Objective (standardized-X scale, intercept handled by centering)::

    1/2 * ||y_c - X b||^2 + lam * sum_j w_j |b_j|

Weights are equivalent to rescaling column ``j`` by ``1 / w_j``; see
:func:`rescale_for_weights`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import RankDeficientError

ZERO_THRESHOLD = 1e-7
WEIGHT_CAP = 1e6
CD_TOL = 1e-9
MAX_SWEEPS = 100_000
LAMBDA_MIN_RATIO = 1e-4


@dataclass(eq=False)
class PenalizedFit:
    lam: float
    weights: np.ndarray
    coefficients: np.ndarray
    intercept: float
    active_set: np.ndarray
    signs: np.ndarray
    n_iter: int
    converged: bool

    @property
    def model(self):
        return tuple(int(j) for j in self.active_set)


POLISH_EVERY = 5


@numba.njit(cache=True)
def _solve_small(a, b):
    """Gaussian elimination with partial pivoting; ``ok`` is False if near singular."""
    m = a.shape[0]
    a = a.copy()
    b = b.copy()
    scale = 0.0
    for i in range(m):
        scale = max(scale, abs(a[i, i]))
    for c in range(m):
        piv = c
        for r in range(c + 1, m):
            if abs(a[r, c]) > abs(a[piv, c]):
                piv = r
        if abs(a[piv, c]) <= 1e-13 * scale:
            return b, False
        if piv != c:
            for k in range(m):
                a[c, k], a[piv, k] = a[piv, k], a[c, k]
            b[c], b[piv] = b[piv], b[c]
        for r in range(c + 1, m):
            f = a[r, c] / a[c, c]
            for k in range(c, m):
                a[r, k] -= f * a[c, k]
            b[r] -= f * b[c]
    for c in range(m - 1, -1, -1):
        acc = b[c]
        for k in range(c + 1, m):
            acc -= a[c, k] * b[k]
        b[c] = acc / a[c, c]
    return b, True


@numba.njit(cache=True)
def _polish(gram, xty, lam, weights, beta, resid):
    """Exact solve on an active set seeded from ``beta``; kept only if it satisfies KKT.

    Coordinate descent crawls on near-collinear designs.  Once the active
    set and signs are right the stationarity equations are linear, so solve
    them directly.  Variables whose solved sign flips are dropped and the
    worst KKT violator is added, for at most ``2p`` rounds.
    """
    p = beta.shape[0]
    signs = np.sign(beta)
    slack = 1e-10 * (1.0 + np.max(np.abs(xty)))
    for _ in range(2 * p):
        idx = np.flatnonzero(signs)
        m = idx.shape[0]
        if m == 0:
            return False
        g = np.empty((m, m))
        rhs = np.empty(m)
        for a in range(m):
            ja = idx[a]
            rhs[a] = xty[ja] - lam * weights[ja] * signs[ja]
            for b in range(m):
                g[a, b] = gram[ja, idx[b]]
        sol, ok = _solve_small(g, rhs)
        if not ok:
            return False
        flipped = False
        for a in range(m):
            if np.sign(sol[a]) != signs[idx[a]]:
                signs[idx[a]] = 0.0
                flipped = True
        if flipped:
            continue
        cand = np.zeros(p)
        for a in range(m):
            cand[idx[a]] = sol[a]
        grad = xty - gram @ cand
        worst, worst_j = slack, -1
        for j in range(p):
            if cand[j] == 0.0:
                excess = abs(grad[j]) - lam * weights[j]
                if excess > worst:
                    worst, worst_j = excess, j
        if worst_j >= 0:
            signs[worst_j] = np.sign(grad[worst_j])
            continue
        beta[:] = cand
        resid[:] = grad
        return True
    return False


@numba.njit(cache=True)
def _cd(gram, xty, lam, weights, beta, resid, tol, max_sweeps, trace, yty):
    """Covariance-update coordinate descent, in place on ``beta``/``resid``.

    ``resid`` holds X^T (y - X beta).  Every few sweeps an exact active-set
    solve is tried (see :func:`_polish`).  Returns the number of sweeps run,
    or ``-max_sweeps`` when the tolerance was never reached.
    """
    p = beta.shape[0]
    for sweep in range(max_sweeps):
        max_delta = 0.0
        for j in range(p):
            gjj = gram[j, j]
            if gjj <= 0.0:
                continue
            old = beta[j]
            z = resid[j] + gjj * old
            thr = lam * weights[j]
            if z > thr:
                new = (z - thr) / gjj
            elif z < -thr:
                new = (z + thr) / gjj
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                beta[j] = new
                for k in range(p):
                    resid[k] -= gram[k, j] * delta
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        done = max_delta <= tol
        if not done and (sweep + 1) % POLISH_EVERY == 0:
            done = _polish(gram, xty, lam, weights, beta, resid)
        if sweep < trace.shape[0]:
            obj = 0.5 * yty
            pen = 0.0
            for k in range(p):
                obj -= 0.5 * beta[k] * (xty[k] + resid[k])
                pen += weights[k] * abs(beta[k])
            trace[sweep] = obj + lam * pen
        if done:
            return sweep + 1
    return -max_sweeps


@numba.njit(cache=True)
def _cd_path(gram, xty, lambdas, weights, tol, max_sweeps):
    p = gram.shape[0]
    out = np.zeros((lambdas.shape[0], p))
    beta = np.zeros(p)
    resid = xty.copy()
    trace = np.zeros(0)
    for i in range(lambdas.shape[0]):
        _cd(gram, xty, lambdas[i], weights, beta, resid, tol, max_sweeps, trace, 0.0)
        out[i] = beta
    return out


def _center(x, y):
    xm = x.mean(axis=0)
    ym = y.mean()
    return x - xm, y - ym, xm, ym


def _check_weights(weights, p):
    if weights is None:
        return np.ones(p)
    w = np.asarray(weights, dtype=float)
    if w.shape != (p,) or not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be a finite positive vector of length p")
    return w


def fit_lasso(x_std, y, lam, weights=None, *, tol=CD_TOL, max_sweeps=MAX_SWEEPS,
              warm_start=None, trace=None) -> PenalizedFit:
    """Minimize the weighted Lasso objective at a single penalty.

    ``trace``, if given, is a float array filled with the objective value
    after each sweep (as many sweeps as it has room for).
    """
    x = np.asarray(x_std, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    n, p = x.shape
    w = _check_weights(weights, p)
    xc, yc, xm, ym = _center(x, y)
    gram = xc.T @ xc
    xty = xc.T @ yc
    beta = np.zeros(p) if warm_start is None else np.array(warm_start, dtype=float)
    resid = xty - gram @ beta
    tr = np.zeros(0) if trace is None else trace
    sweeps = _cd(gram, xty, float(lam), w, beta, resid, tol, max_sweeps, tr, float(yc @ yc))
    return _finish(beta, lam, w, xm, ym, abs(sweeps), sweeps > 0)


def _finish(beta, lam, w, xm, ym, n_iter, converged):
    beta = beta.copy()
    beta[np.abs(beta) <= ZERO_THRESHOLD] = 0.0
    active = np.flatnonzero(beta)
    return PenalizedFit(
        lam=float(lam), weights=w, coefficients=beta, intercept=float(ym - xm @ beta),
        active_set=active, signs=np.sign(beta[active]), n_iter=int(n_iter),
        converged=bool(converged),
    )


def lambda_max(x_std, y, weights=None):
    x = np.asarray(x_std, dtype=float)
    w = _check_weights(weights, x.shape[1])
    xc, yc, _, _ = _center(x, np.asarray(y, dtype=float))
    return float(np.max(np.abs(xc.T @ yc) / w))


def lambda_path(x_std, y, weights=None, n_lambda=100, min_ratio=LAMBDA_MIN_RATIO):
    """Decreasing log-spaced grid from ``lambda_max`` to ``min_ratio * lambda_max``."""
    if n_lambda < 2:
        raise ValueError("n_lambda must be >= 2")
    lmax = lambda_max(x_std, y, weights)
    if lmax <= 0:
        lmax = 1.0
    return lmax * np.logspace(0.0, np.log10(min_ratio), n_lambda)


def path_coefficients(x_std, y, lambdas, weights=None, *, tol=CD_TOL, max_sweeps=MAX_SWEEPS):
    """Warm-started solutions along ``lambdas``; returns (coefs, x means, y mean)."""
    x = np.asarray(x_std, dtype=float)
    w = _check_weights(weights, x.shape[1])
    xc, yc, xm, ym = _center(x, np.asarray(y, dtype=float))
    coefs = _cd_path(xc.T @ xc, xc.T @ yc, np.asarray(lambdas, dtype=float), w, tol, max_sweeps)
    return coefs, xm, ym


def fit_on_path(x_std, y, lambdas, index, weights=None) -> PenalizedFit:
    """Fit at ``lambdas[index]`` warm-started along the grid, polished to tolerance."""
    lambdas = np.asarray(lambdas, dtype=float)
    coefs, _, _ = path_coefficients(x_std, y, lambdas[: index + 1], weights)
    return fit_lasso(x_std, y, lambdas[index], weights, warm_start=coefs[-1])


def kkt_residual(x_std, y, fit: PenalizedFit) -> float:
    """Largest violation of the Lasso optimality conditions."""
    xc, yc, _, _ = _center(np.asarray(x_std, float), np.asarray(y, float))
    grad = xc.T @ (yc - xc @ fit.coefficients)
    thr = fit.lam * fit.weights
    active = fit.coefficients != 0
    viol_active = np.abs(grad[active] - thr[active] * np.sign(fit.coefficients[active]))
    viol_inactive = np.maximum(np.abs(grad[~active]) - thr[~active], 0.0)
    return float(np.concatenate([viol_active, viol_inactive, [0.0]]).max())


def objective(x_std, y, beta, lam, weights=None):
    xc, yc, _, _ = _center(np.asarray(x_std, float), np.asarray(y, float))
    w = _check_weights(weights, xc.shape[1])
    r = yc - xc @ beta
    return 0.5 * float(r @ r) + lam * float(w @ np.abs(beta))


def ols_coefficients(x_std, y):
    """Full-model least squares slopes (intercept by centering)."""
    xc, yc, _, _ = _center(np.asarray(x_std, float), np.asarray(y, float))
    check_full_rank(xc)
    return np.linalg.lstsq(xc, yc, rcond=None)[0]


def check_full_rank(xc, columns=None):
    columns = np.arange(xc.shape[1]) if columns is None else np.asarray(columns)
    if xc.shape[1] == 0:
        return
    if xc.shape[0] <= xc.shape[1]:
        raise RankDeficientError(columns, f"{xc.shape[0]} rows cannot identify {xc.shape[1]} columns")
    s = np.linalg.svd(xc, compute_uv=False)
    tol = s.max() * max(xc.shape) * np.finfo(float).eps * 1e3
    if s.min() <= tol:
        raise RankDeficientError(_collinear_columns(xc, columns, tol))


def _collinear_columns(xc, columns, tol):
    _, s, vt = np.linalg.svd(xc, full_matrices=False)
    null = vt[s <= tol]
    involved = np.any(np.abs(null) > 1e-8, axis=0)
    return [int(c) for c in columns[involved]]


def adaptive_weights(x_std, y, cap=WEIGHT_CAP):
    """Reciprocal absolute OLS coefficients, capped at ``cap``."""
    beta = ols_coefficients(x_std, y)
    with np.errstate(divide="ignore"):
        w = 1.0 / np.abs(beta)
    return np.minimum(w, cap)


def rescale_for_weights(x_std, weights):
    """Column ``j`` divided by ``w_j``; coefficients map back as ``b_j = b~_j / w_j``."""
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return np.asarray(x_std, dtype=float) / w

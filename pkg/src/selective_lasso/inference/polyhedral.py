"""Exact post-selection intervals for the fixed-penalty Lasso.

For a fixed ``lam`` the event {selected model = M, signs = s} is a polyhedron
``{y : A y <= b}``.  Conditioning a linear contrast ``eta^T y`` on that
polyhedron leaves a Gaussian truncated to ``[v_minus, v_plus]``, whose CDF
is a pivot for ``eta^T mu``.  Inverting the pivot over a grid of candidate
means gives the interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import DegenerateIntervalError, InternalConsistencyError
from ..lasso import PenalizedFit, check_full_rank, rescale_for_weights
from .classical import SelectiveInterval
from .truncnorm import truncnorm_cdf, truncnorm_cdf_scalar

GRID_BOUND = 1000.0
GRID_POINTS = 1000
EVENT_TOL = 1e-4


@dataclass(eq=False)
class PolyhedralEvent:
    a_matrix: np.ndarray
    b_vector: np.ndarray
    lam: float
    model: tuple
    signs: np.ndarray
    weights: np.ndarray | None = None

    @property
    def n_constraints(self):
        return self.b_vector.size

    def contains(self, y, tol=0.0):
        return bool(np.all(self.a_matrix @ y <= self.b_vector + tol))

    def slack(self, y):
        return self.b_vector - self.a_matrix @ y


def polyhedral_constraints(x_std, lam, weights, model, signs, y=None) -> PolyhedralEvent:
    """Constraint rows for {Lasso selects ``model`` with ``signs``}.

    Weighted problems are handled on the rescaled design.  Rows come in the
    order: inactive upper, inactive lower, active sign constraints.  When
    ``y`` is given, it must lie in the event up to ``EVENT_TOL``.
    """
    x = np.asarray(x_std, dtype=float)
    if weights is not None and not np.all(np.asarray(weights) == 1.0):
        x = rescale_for_weights(x, weights)
    x = x - x.mean(axis=0)
    model = tuple(int(j) for j in model)
    if not model:
        raise ValueError("polyhedral_constraints needs a nonempty model")
    if lam <= 0:
        raise ValueError("lam must be positive")
    s = np.asarray(signs, dtype=float)
    n, p = x.shape
    inactive = np.setdiff1d(np.arange(p), model)
    xa = x[:, model]
    check_full_rank(xa, np.asarray(model))
    g = np.linalg.inv(xa.T @ xa)
    xa_pinv = g @ xa.T                          # |M| x n
    resid_proj = np.eye(n) - xa @ xa_pinv       # I - P_M

    rows, bounds = [], []
    if inactive.size:
        xi = x[:, inactive]
        core = xi.T @ resid_proj / lam
        shift = xi.T @ xa @ (g @ s)
        rows += [core, -core]
        bounds += [1.0 - shift, 1.0 + shift]
    rows.append(-s[:, None] * xa_pinv)
    bounds.append(-lam * s * (g @ s))
    event = PolyhedralEvent(np.vstack(rows), np.concatenate(bounds), float(lam), model, s,
                            None if weights is None else np.asarray(weights, float))
    if y is not None:
        worst = float(np.min(event.slack(np.asarray(y, float))))
        if worst < -EVENT_TOL:
            raise InternalConsistencyError(
                f"observed y violates its selection event by {-worst:.3g} "
                "(solver tolerance / zero threshold mismatch)"
            )
    return event


def truncation_interval(eta, y, event: PolyhedralEvent, sigma=1.0):
    """Range ``[v_minus, v_plus]`` of ``eta^T y`` within the event, other directions fixed."""
    eta = np.asarray(eta, dtype=float)
    y = np.asarray(y, dtype=float)
    norm2 = float(eta @ eta)
    if norm2 <= 0:
        raise ValueError("eta must be nonzero")
    if event.n_constraints == 0:
        return -np.inf, np.inf
    stat = float(eta @ y)
    c = eta / norm2
    z = y - c * stat
    rho = event.a_matrix @ c
    room = event.b_vector - event.a_matrix @ z
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = room / rho
    neg, pos = rho < 0, rho > 0
    v_minus = float(ratio[neg].max()) if neg.any() else -np.inf
    v_plus = float(ratio[pos].min()) if pos.any() else np.inf
    tol = EVENT_TOL * max(1.0, sigma * np.sqrt(norm2), abs(stat))
    if stat < v_minus - tol or stat > v_plus + tol:
        raise InternalConsistencyError(
            f"statistic {stat:.6g} outside its truncation interval [{v_minus:.6g}, {v_plus:.6g}]"
        )
    return v_minus, v_plus


def _invert_pivot(stat, sd, v_minus, v_plus, alpha, grid_bound, grid_points):
    """Interval {theta : alpha/2 <= F_theta(stat) <= 1 - alpha/2}.

    Returns (lower, upper, hit_bound).  The grid spans ``+/- grid_bound``
    standard deviations of the statistic; crossings inside a grid cell are
    located by root finding.
    """
    grid = sd * np.linspace(-grid_bound, grid_bound, grid_points)
    vals = truncnorm_cdf(stat, grid, sd, v_minus, v_plus)
    pivot = lambda theta: truncnorm_cdf_scalar(stat, theta, sd, v_minus, v_plus)
    if np.isnan(vals).any():
        raise DegenerateIntervalError("pivot is undefined on part of the grid")
    lo_q, hi_q = alpha / 2, 1 - alpha / 2

    # pivot decreases in theta
    below_hi = np.flatnonzero(vals <= hi_q)
    above_lo = np.flatnonzero(vals >= lo_q)
    if below_hi.size == 0:
        return grid[-1], grid[-1], True
    if above_lo.size == 0:
        return grid[0], grid[0], True

    hit = False
    i = below_hi[0]
    if i == 0:
        lower, hit = grid[0], True
    else:
        lower = brentq(lambda t: pivot(t) - hi_q, grid[i - 1], grid[i], xtol=1e-12 * sd)
    k = above_lo[-1]
    if k == grid.size - 1:
        upper, hit = grid[-1], True
    else:
        upper = brentq(lambda t: pivot(t) - lo_q, grid[k], grid[k + 1], xtol=1e-12 * sd)
    return float(lower), float(upper), hit


def selective_ci_exact(x_std, y, fit: PenalizedFit, sigma_hat, alpha=0.1, *,
                       event: PolyhedralEvent | None = None,
                       grid_bound=GRID_BOUND, grid_points=GRID_POINTS, method="SI"):
    """Selective intervals for every variable in ``fit.active_set``.

    ``sigma_hat`` is treated as the known noise SD.  Weighted fits are
    handled on the rescaled design and mapped back by dividing by the
    weight.  Variables whose pivot cannot be inverted are returned with the
    degenerate interval ``[estimate, estimate]`` flagged infinite.
    """
    model = fit.model
    if not model:
        return []
    if sigma_hat <= 0:
        raise ValueError("sigma_hat must be positive")
    x = np.asarray(x_std, dtype=float)
    y = np.asarray(y, dtype=float)
    w = fit.weights
    weighted = not np.all(w == 1.0)
    xs = rescale_for_weights(x, w) if weighted else x
    if event is None:
        event = polyhedral_constraints(x, fit.lam, w if weighted else None, model, fit.signs, y)

    xa = xs[:, list(model)]
    xa = xa - xa.mean(axis=0)
    etas = np.linalg.solve(xa.T @ xa, xa.T)
    yc = y - y.mean()
    out = []
    for row, j in enumerate(model):
        eta = etas[row]
        sd = sigma_hat * float(np.sqrt(eta @ eta))
        stat = float(eta @ yc)
        v_minus, v_plus = truncation_interval(eta, yc, event, sigma_hat)
        stat_in = min(max(stat, v_minus), v_plus)
        scale = w[j] if weighted else 1.0
        estimate = stat / scale
        try:
            lower, upper, hit = _invert_pivot(stat_in, sd, v_minus, v_plus, alpha,
                                              grid_bound, grid_points)
        except DegenerateIntervalError:
            out.append(SelectiveInterval(j, estimate, estimate, estimate, np.nan, method,
                                         flag_infinite=True))
            continue
        f0 = truncnorm_cdf_scalar(stat_in, 0.0, sd, v_minus, v_plus)
        p_value = 1.0 - f0 if estimate >= 0 else f0
        out.append(SelectiveInterval(j, estimate, lower / scale, upper / scale,
                                     float(np.clip(p_value, 0.0, 1.0)), method,
                                     flag_infinite=hit))
    return out

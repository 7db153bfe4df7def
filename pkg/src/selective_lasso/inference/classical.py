"""Least-squares refits, Wald intervals and the interval record type."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri, stdtr, stdtrit

from ..errors import RankDeficientError
from ..lasso import check_full_rank


@dataclass(eq=False)
class SelectiveInterval:
    variable: int
    estimate: float
    lower: float
    upper: float
    p_value: float
    method: str
    flag_infinite: bool = False
    flag_excludes_estimate: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"interval for variable {self.variable}: lower > upper")
        self.flag_excludes_estimate = not (self.lower <= self.estimate <= self.upper)

    @property
    def width(self):
        return np.inf if self.flag_infinite else self.upper - self.lower

    @property
    def unstable(self):
        return self.flag_infinite or self.flag_excludes_estimate

    def covers(self, value):
        return self.lower <= value <= self.upper

    @property
    def excludes_zero(self):
        return not self.covers(0.0)


@dataclass(eq=False)
class OlsFit:
    model: tuple
    coefficients: np.ndarray
    std_errors: np.ndarray
    residual_sd: float
    df: float
    intercept: float = 0.0

    def predict(self, x_std):
        x = np.asarray(x_std, dtype=float)
        return self.intercept + x[:, list(self.model)] @ self.coefficients


def ols_fit(x_std, y, model, *, sigma=None, df=None) -> OlsFit:
    """Least squares of ``y`` on the columns in ``model`` plus an intercept.

    ``sigma``/``df`` override the residual SD used for standard errors
    (e.g. a full-model estimate).
    """
    x = np.asarray(x_std, dtype=float)
    y = np.asarray(y, dtype=float)
    model = tuple(int(j) for j in model)
    n = x.shape[0]
    if len(model) >= n - 1:
        raise RankDeficientError(model, f"model of size {len(model)} needs more than {n} rows")
    xm, ym = x[:, list(model)].mean(axis=0), y.mean()
    xc = x[:, list(model)] - xm
    yc = y - ym
    check_full_rank(xc, np.asarray(model, dtype=int))
    if model:
        gram_inv = np.linalg.inv(xc.T @ xc)
        coef = gram_inv @ (xc.T @ yc)
        unscaled = np.sqrt(np.diag(gram_inv))
    else:
        coef = np.zeros(0)
        unscaled = np.zeros(0)
    resid = yc - xc @ coef
    own_df = n - len(model) - 1
    own_sd = float(np.sqrt(resid @ resid / own_df))
    sd = own_sd if sigma is None else float(sigma)
    out_df = (own_df if sigma is None else np.inf) if df is None else df
    return OlsFit(model, coef, sd * unscaled, sd, out_df, float(ym - xm @ coef))


def full_model_sigma(x_std, y):
    """Residual SD of the full OLS fit, denominator ``n - p - 1``."""
    fit = ols_fit(x_std, y, range(np.shape(x_std)[1]))
    return fit.residual_sd, fit.df


def t_quantile(df, q):
    return float(ndtri(q) if np.isinf(df) else stdtrit(df, q))


def t_sf(df, t):
    return float(ndtr(-t) if np.isinf(df) else stdtr(df, -t))


def wald_ci(fit: OlsFit, alpha=0.1, method="Wald"):
    if fit.df < 1:
        raise ValueError("Wald intervals need df >= 1")
    crit = t_quantile(fit.df, 1 - alpha / 2)
    out = []
    for j, b, se in zip(fit.model, fit.coefficients, fit.std_errors):
        tval = abs(b) / se
        out.append(SelectiveInterval(
            variable=j, estimate=float(b), lower=float(b - crit * se), upper=float(b + crit * se),
            p_value=min(1.0, 2 * t_sf(fit.df, tval)), method=method,
        ))
    return out

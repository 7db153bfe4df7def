"""Lasso / adaptive-Lasso selection with CV or Negahban tuning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .inference.classical import full_model_sigma, ols_fit
from .lasso import PenalizedFit, adaptive_weights, fit_lasso, fit_on_path, rescale_for_weights
from .tuning import TuningResult, cv_lambda, negahban_lambda

CV_FOLDS = 10
PENALTIES = ("Lasso", "ALasso")
TUNERS = ("CV", "Neg")


@dataclass(eq=False)
class SelectionResult:
    method: str
    lam: float
    active_set: np.ndarray
    signs: np.ndarray
    coefficients: np.ndarray
    refit: np.ndarray
    weights: np.ndarray
    fit: PenalizedFit
    tuning: TuningResult
    sigma_hat: float | None = None

    @property
    def model(self):
        return tuple(int(j) for j in self.active_set)

    @property
    def converged(self):
        return self.fit.converged


def effective_folds(n, k=CV_FOLDS):
    """Fold count actually used: ``k`` capped so every fold has >= 2 rows."""
    return max(2, min(k, n // 2))


def select(x_std, y, penalty="Lasso", tuner="CV", rng=None, *, k=CV_FOLDS,
           sigma_hat=None, n_lambda=100) -> SelectionResult:
    """Fit the penalized model and return its active set.

    Parameters
    ----------
    penalty : {"Lasso", "ALasso"}
        ALasso uses weights ``1/|beta_OLS|`` from the full model.
    tuner : {"CV", "Neg"}
        ``Neg`` needs a noise SD; by default the full-model residual SD.
    """
    if penalty not in PENALTIES:
        raise ValueError(f"unknown penalty {penalty!r}")
    if tuner not in TUNERS:
        raise ValueError(f"unknown tuner {tuner!r}")
    x = np.asarray(x_std, dtype=float)
    y = np.asarray(y, dtype=float)
    rng = np.random.default_rng(rng)
    p = x.shape[1]
    weights = adaptive_weights(x, y) if penalty == "ALasso" else None

    if tuner == "CV":
        tuning = cv_lambda(x, y, weights, k=effective_folds(x.shape[0], k), rng=rng,
                           n_lambda=n_lambda)
        fit = fit_on_path(x, y, tuning.lambdas, tuning.index, weights)
    else:
        if sigma_hat is None:
            sigma_hat, _ = full_model_sigma(x, y)
        xs = x if weights is None else rescale_for_weights(x, weights)
        tuning = negahban_lambda(xs, sigma_hat, rng=rng)
        fit = fit_lasso(x, y, tuning.lam, weights)

    refit = np.zeros(p)
    if fit.model:
        refit[list(fit.model)] = ols_fit(x, y, fit.model).coefficients
    return SelectionResult(
        method=f"{penalty}-{tuner}", lam=fit.lam, active_set=fit.active_set, signs=fit.signs,
        coefficients=fit.coefficients, refit=refit, weights=fit.weights, fit=fit,
        tuning=tuning, sigma_hat=sigma_hat,
    )


def make_selector(penalty="Lasso", tuner="CV", **kwargs):
    """Selector callable ``(x, y, rng) -> SelectionResult`` for splitting and bootstrap."""
    def selector(x, y, rng):
        return select(x, y, penalty, tuner, rng, **kwargs)
    selector.__name__ = f"{penalty}-{tuner}"
    return selector

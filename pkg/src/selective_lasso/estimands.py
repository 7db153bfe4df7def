"""Submodel targets and the selective performance estimands.

General estimands pool every interval that exists; conditional ones fix a
variable and pool over the iterations in which it was selected.  Ratios
with an empty denominator are ``None`` so they can never masquerade as 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficientError

TOY_ZERO_TOL = 1e-12
REALISTIC_ZERO_TOL = 1e-3


@dataclass(eq=False)
class SubmodelTarget:
    model: tuple
    targets: np.ndarray

    def as_dict(self):
        return dict(zip(self.model, self.targets.tolist()))


def submodel_target(sigma_true, beta_true, model) -> SubmodelTarget:
    """Population slopes of the best linear predictor restricted to ``model``.

    ``Sigma_M^{-1} Sigma_{M, full} beta``.  With the full model (or an
    uncorrelated Sigma) this returns ``beta`` (restricted to ``model``).
    """
    sigma = np.asarray(sigma_true, dtype=float)
    beta = np.asarray(beta_true, dtype=float)
    model = tuple(int(j) for j in model)
    if not model:
        return SubmodelTarget(model, np.zeros(0))
    sm = sigma[np.ix_(model, model)]
    if np.linalg.cond(sm) > 1e12:
        raise RankDeficientError(model, f"Sigma restricted to {model} is singular")
    return SubmodelTarget(model, np.linalg.solve(sm, sigma[list(model)] @ beta))


def design_target(x_std, beta_true, model) -> SubmodelTarget:
    """Fixed-design version ``(X_M^T X_M)^{-1} X_M^T X beta`` (columns centered)."""
    x = np.asarray(x_std, dtype=float)
    x = x - x.mean(axis=0)
    return submodel_target(x.T @ x, beta_true, model)


@dataclass(eq=False)
class VariableOutcome:
    iteration: int
    method: str
    variable: int
    selected: bool
    target: float | None = None
    covered: bool | None = None
    excludes_zero: bool | None = None
    width: float | None = None
    estimate: float | None = None
    lower: float | None = None
    upper: float | None = None
    p_value: float | None = None
    flag_infinite: bool = False
    flag_excludes_estimate: bool = False
    failure_code: str = ""

    @property
    def available(self):
        return self.covered is not None

    @property
    def unstable(self):
        return self.flag_infinite or self.flag_excludes_estimate


def _ratio(num, den):
    return None if den == 0 else num / den


@dataclass
class GeneralEstimands:
    coverage: float | None
    power: float | None
    type1: float | None
    n_intervals: int = 0
    n_nonzero: int = 0
    n_zero: int = 0


def _is_zero(target, tol):
    return abs(target) <= tol


def aggregate_general(outcomes, zero_tol=TOY_ZERO_TOL) -> GeneralEstimands:
    """Coverage over all available intervals; power / type-1 split by zero target."""
    avail = [o for o in outcomes if o.available]
    zero = [o for o in avail if _is_zero(o.target, zero_tol)]
    nonzero = [o for o in avail if not _is_zero(o.target, zero_tol)]
    return GeneralEstimands(
        coverage=_ratio(sum(o.covered for o in avail), len(avail)),
        power=_ratio(sum(o.excludes_zero for o in nonzero), len(nonzero)),
        type1=_ratio(sum(o.excludes_zero for o in zero), len(zero)),
        n_intervals=len(avail), n_nonzero=len(nonzero), n_zero=len(zero),
    )


@dataclass
class ConditionalEstimands(GeneralEstimands):
    variable: int = -1
    selection_freq: float = 0.0


def _n_iterations(outcomes, n_iter):
    return n_iter if n_iter is not None else len({o.iteration for o in outcomes})


def aggregate_conditional(outcomes, variable, zero_tol=TOY_ZERO_TOL, n_iter=None):
    """Estimands for ``variable`` over iterations in which it was selected."""
    mine = [o for o in outcomes if o.variable == variable]
    general = aggregate_general(mine, zero_tol)
    n = _n_iterations(outcomes, n_iter)
    freq = sum(o.selected for o in mine) / n if n else 0.0
    return ConditionalEstimands(**vars(general), variable=variable, selection_freq=freq)


@dataclass
class SelectionMetrics:
    true_model_freq: float | None
    any_false_positive_freq: float | None
    per_variable_freq: dict = field(default_factory=dict)


def selection_metrics(outcomes, true_support, p=None) -> SelectionMetrics:
    support = {int(j) for j in true_support}
    models: dict[int, set] = {}
    for o in outcomes:
        chosen = models.setdefault(o.iteration, set())
        if o.selected:
            chosen.add(o.variable)
    n = len(models)
    if n == 0:
        return SelectionMetrics(None, None, {})
    variables = range(p) if p is not None else sorted({o.variable for o in outcomes})
    return SelectionMetrics(
        true_model_freq=sum(m == support for m in models.values()) / n,
        any_false_positive_freq=sum(not m <= support for m in models.values()) / n,
        per_variable_freq={j: sum(j in m for m in models.values()) / n for j in variables},
    )


def validation_r2(y_valid, y_hat):
    """``1 - SSE / SST`` on held-out outcomes; ``None`` when ``y_valid`` is constant."""
    yv = np.asarray(y_valid, dtype=float)
    yh = np.asarray(y_hat, dtype=float)
    if yv.shape != yh.shape:
        raise ValueError("y_valid and y_hat differ in length")
    sst = float(np.sum((yv - yv.mean()) ** 2))
    if sst <= 0:
        return None
    return 1.0 - float(np.sum((yv - yh) ** 2)) / sst


@dataclass
class WidthSummary:
    median_width: float | None
    iqr_width: float | None
    unstable_rate: float | None
    infinite_rate: float | None


def width_summary(outcomes) -> WidthSummary:
    avail = [o for o in outcomes if o.available]
    finite = np.array([o.width for o in avail if not o.flag_infinite and np.isfinite(o.width)])
    if finite.size:
        q1, med, q3 = np.percentile(finite, [25, 50, 75])
        med, iqr = float(med), float(q3 - q1)
    else:
        med = iqr = None
    return WidthSummary(
        median_width=med, iqr_width=iqr,
        unstable_rate=_ratio(sum(o.unstable for o in avail), len(avail)),
        infinite_rate=_ratio(sum(o.flag_infinite for o in avail), len(avail)),
    )


def total_probability_mix(conditionals):
    """General coverage rebuilt from conditional coverages weighted by interval counts."""
    num = sum(c.coverage * c.n_intervals for c in conditionals if c.coverage is not None)
    den = sum(c.n_intervals for c in conditionals)
    return _ratio(num, den)

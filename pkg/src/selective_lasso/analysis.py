"""Run the interval methods on an observed dataset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import standardize
from .errors import ConfigurationError
from .harness import bootstrap_selection_frequencies, component_rng, resolve_methods
from .inference.classical import full_model_sigma, ols_fit, wald_ci
from .inference.polyhedral import selective_ci_exact
from .inference.posi import posi_ci, posi_constant
from .inference.split import split_inference
from .selection import make_selector, select


@dataclass
class AnalysisRow:
    method: str
    variable: str
    selected: bool
    estimate: float | None = None
    lower: float | None = None
    upper: float | None = None
    estimate_std: float | None = None
    lower_std: float | None = None
    upper_std: float | None = None
    p_value: float | None = None
    flag_infinite: bool = False
    flag_excludes_estimate: bool = False
    boot_freq: float | None = None

    @property
    def excludes_zero(self):
        return self.lower is not None and not (self.lower <= 0.0 <= self.upper)


def analyze_dataset(x_raw, y, names, methods=("Lasso-CV-SI", "Lasso-CV-PoSI"), alpha=0.1,
                    n_boot=100, seed=0, posi_draws=1000):
    """Per-method, per-variable estimates and intervals in original units.

    Predictors are standardized (n-denominator SD); slopes and interval
    endpoints are mapped back by dividing by each column's SD.  Bootstrap
    selection frequencies rerun the method's selector, tuning included.
    """
    x_raw = np.asarray(x_raw, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x_raw.shape
    if len(names) != p:
        raise ConfigurationError("names must match the number of columns")
    if n <= p + 2:
        raise ConfigurationError(f"need n > p + 2 (n={n}, p={p})")
    x, _, scale = standardize(x_raw)
    const = [names[j] for j in np.flatnonzero(scale <= 0)]
    if const:
        raise ConfigurationError(f"constant predictor columns: {const}")
    if np.var(y) <= 0:
        raise ConfigurationError("outcome is constant")
    specs = resolve_methods(methods)
    if any(s.id == "Oracle" for s in specs):
        raise ConfigurationError("Oracle needs the true support and is simulation-only")
    rng = lambda key: component_rng(seed, "analyze", 0, key)
    sigma, df = full_model_sigma(x, y)

    rows, selections, posi = [], {}, None
    for spec in specs:
        if spec.id == "Full":
            model = tuple(range(p))
            intervals = wald_ci(ols_fit(x, y, model), alpha, method=spec.id)
            freq = np.ones(p)
        else:
            if spec.inference == "Split":
                res = split_inference(x, y, make_selector(spec.penalty, spec.tuner), alpha,
                                      rng(spec.id))
                model, intervals = res.model, res.intervals
            else:
                key = spec.selector_key
                if key not in selections:
                    selections[key] = select(x, y, spec.penalty, spec.tuner, rng(key),
                                             sigma_hat=sigma if spec.tuner == "Neg" else None)
                sel = selections[key]
                model = sel.model
                if not model:
                    intervals = []
                elif spec.inference == "PoSI":
                    if posi is None:
                        posi = posi_constant(x, alpha, df=df, n_mc=posi_draws, rng=rng("posi"))
                    intervals = posi_ci(ols_fit(x, y, model, sigma=sigma, df=df), posi,
                                        method=spec.id)
                else:
                    intervals = selective_ci_exact(x, y, sel.fit, sigma, alpha, method=spec.id)
            freq = bootstrap_selection_frequencies(
                x_raw, y, make_selector(spec.penalty, spec.tuner), n_boot, rng("boot-" + spec.id))
        by_var = {iv.variable: iv for iv in intervals}
        for j in range(p):
            row = AnalysisRow(spec.id, names[j], j in model, boot_freq=float(freq[j]))
            iv = by_var.get(j)
            if iv is not None:
                row.estimate_std, row.lower_std, row.upper_std = iv.estimate, iv.lower, iv.upper
                row.estimate = iv.estimate / scale[j]
                row.lower, row.upper = iv.lower / scale[j], iv.upper / scale[j]
                row.p_value = iv.p_value
                row.flag_infinite, row.flag_excludes_estimate = iv.flag_infinite, iv.flag_excludes_estimate
            rows.append(row)
    return rows


def format_report(rows, alpha=0.1):
    level = int(round(100 * (1 - alpha)))
    head = (f"{'method':<16}{'variable':<10}{'sel':>4}{'estimate':>11}"
            f"{f'{level}% CI':>26}{'p':>9}{'boot':>7}  flags")
    lines = [head, "-" * len(head)]
    for r in rows:
        if r.lower is None:
            ci, est, pv = "", "", ""
        else:
            ci = f"[{r.lower:10.4g}, {r.upper:10.4g}]"
            est, pv = f"{r.estimate:.4g}", f"{r.p_value:.3g}"
        flags = ",".join(f for f, on in (("infinite", r.flag_infinite),
                                         ("excl-est", r.flag_excludes_estimate)) if on)
        boot = "" if r.boot_freq is None else f"{r.boot_freq:.2f}"
        lines.append(f"{r.method:<16}{r.variable:<10}{'*' if r.selected else '':>4}{est:>11}"
                     f"{ci:>26}{pv:>9}{boot:>7}  {flags}")
    return "\n".join(lines)

"""Walk through the three interval procedures on one simulated dataset.

Run with ``python demos/one_dataset.py``.
"""

import numpy as np

from selective_lasso import datagen
from selective_lasso.estimands import submodel_target
from selective_lasso.inference import ols_fit, posi_ci, posi_constant, selective_ci_exact, wald_ci
from selective_lasso.inference.classical import full_model_sigma
from selective_lasso.inference.split import split_inference
from selective_lasso.selection import make_selector, select

rng = np.random.default_rng(7)

# four correlated predictors, two of them with nonzero slopes
scenario = datagen.make_scenario("toy", "blocks_2_2", "v13", 0.5, 10)
data = datagen.sample_dataset(scenario, rng)
print(f"scenario {scenario.id}: n={data.n}, beta={data.beta_true}")

sigma, df = full_model_sigma(data.x_std, data.y)
sel = select(data.x_std, data.y, "Lasso", "CV", rng)
print(f"Lasso-CV picked lambda={sel.lam:.3f}, model {sel.model}, signs {sel.signs}")

# what the intervals are aiming at: slopes of the projection onto the chosen columns
target = submodel_target(data.sigma_true, data.beta_true, sel.model).as_dict()


def show(name, intervals):
    print(f"\n{name}")
    for iv in intervals:
        hit = "covers" if iv.covers(target.get(iv.variable, np.nan)) else "misses"
        flag = "  (unstable)" if iv.unstable else ""
        print(f"  x{iv.variable + 1}: est {iv.estimate:7.3f}  [{iv.lower:8.3f}, {iv.upper:8.3f}]"
              f"  p={iv.p_value:.3f}  {hit} target {target.get(iv.variable, np.nan):.3f}{flag}")


# naive: pretend the model was fixed in advance
show("naive Wald on the selected model", wald_ci(ols_fit(data.x_std, data.y, sel.model), 0.1))

# conditional on the selection event
show("polyhedral SI", selective_ci_exact(data.x_std, data.y, sel.fit, sigma, 0.1))

# simultaneous over every submodel
k = posi_constant(data.x_std, 0.1, df=df, n_mc=1000, rng=rng)
print(f"\nPoSI constant K={k.k:.3f} (Scheffe bound {k.scheffe():.3f})")
show("PoSI", posi_ci(ols_fit(data.x_std, data.y, sel.model, sigma=sigma, df=df), k))

# fresh half for inference; its own model and targets
res = split_inference(data.x_std, data.y, make_selector("Lasso", "CV"), 0.1, rng)
target = submodel_target(data.sigma_true, data.beta_true, res.model).as_dict()
show(f"sample splitting (model {res.model} chosen on half A)", res.intervals)

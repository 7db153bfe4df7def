"""Lasso and adaptive-Lasso selection with post-selection confidence intervals.

Three interval procedures are provided for a data-selected submodel:
sample splitting, exact polyhedral conditioning at a fixed penalty, and
simultaneous PoSI multipliers.  A simulation harness measures their
selective coverage, power and stability on synthetic designs.
"""

__version__ = "0.1.0"

from .datagen import Dataset, Scenario, build_realistic_design, build_toy_correlation, \
    coefficient_structure, make_scenario, sample_dataset
from .estimands import aggregate_conditional, aggregate_general, submodel_target, validation_r2
from .inference import (
    PolyhedralEvent,
    PosiConstant,
    SelectiveInterval,
    ols_fit,
    polyhedral_constraints,
    posi_ci,
    posi_constant,
    selective_ci_exact,
    split_inference,
    truncation_interval,
    wald_ci,
)
from .lasso import PenalizedFit, adaptive_weights, fit_lasso, lambda_path, rescale_for_weights
from .selection import SelectionResult, select
from .tuning import TuningResult, cv_lambda, negahban_lambda

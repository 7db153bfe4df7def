"""Selective and classical confidence intervals."""

from .classical import OlsFit, SelectiveInterval, full_model_sigma, ols_fit, wald_ci
from .polyhedral import (
    PolyhedralEvent,
    polyhedral_constraints,
    selective_ci_exact,
    truncation_interval,
)
from .posi import PosiConstant, posi_ci, posi_constant, scheffe_bound
from .split import SplitResult, split_inference
from .truncnorm import truncnorm_cdf, truncnorm_sf

__all__ = [
    "OlsFit", "SelectiveInterval", "full_model_sigma", "ols_fit", "wald_ci",
    "PolyhedralEvent", "polyhedral_constraints", "selective_ci_exact", "truncation_interval",
    "PosiConstant", "posi_ci", "posi_constant", "scheffe_bound",
    "SplitResult", "split_inference", "truncnorm_cdf", "truncnorm_sf",
]

"""Truncated normal CDF evaluated on the log scale.

The naive ratio ``(Phi(b) - Phi(x)) / (Phi(b) - Phi(a))`` returns 0/0 as
soon as the truncation window sits a few dozen SDs in a tail.  Working with
``log_ndtr`` (which switches to an asymptotic series deep in the lower
tail) and reflecting upper-tail windows to the lower tail keeps every term
representable.
"""

import math

import numpy as np
from scipy.special import log_ndtr


def _log_diff(log_hi, log_lo):
    """log(exp(log_hi) - exp(log_lo)) for log_hi >= log_lo."""
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(np.isneginf(log_lo), -np.inf, log_lo - log_hi)
        return log_hi + np.log1p(-np.exp(d))


def truncnorm_cdf(x, mean, sd, lower, upper):
    """P(X <= x) for X ~ N(mean, sd^2) truncated to [lower, upper].

    Vectorized over ``mean``.  ``x`` is clipped into the window first.
    """
    mean = np.asarray(mean, dtype=float)
    x = min(max(x, lower), upper)
    za = (lower - mean) / sd
    zb = (upper - mean) / sd
    zx = (x - mean) / sd

    # windows lying above the mean are mirrored into the lower tail
    upper_tail = za > 0
    a = np.where(upper_tail, -zb, za)
    b = np.where(upper_tail, -za, zb)
    t = np.where(upper_tail, -zx, zx)

    log_num = _log_diff(log_ndtr(t), log_ndtr(a))
    log_den = _log_diff(log_ndtr(b), log_ndtr(a))
    with np.errstate(invalid="ignore"):
        ratio = np.exp(log_num - log_den)
    ratio = np.clip(ratio, 0.0, 1.0)
    return np.where(upper_tail, 1.0 - ratio, ratio)


def _log_diff1(log_hi, log_lo):
    if log_lo == -math.inf:
        return log_hi
    if log_lo >= log_hi:
        return -math.inf
    return log_hi + math.log1p(-math.exp(log_lo - log_hi))


def truncnorm_cdf_scalar(x, mean, sd, lower, upper):
    """Scalar :func:`truncnorm_cdf`; avoids array overhead inside root finding."""
    x = min(max(x, lower), upper)
    za, zb, zx = (lower - mean) / sd, (upper - mean) / sd, (x - mean) / sd
    flip = za > 0
    if flip:
        za, zb, zx = -zb, -za, -zx
    la = float(log_ndtr(za))
    log_den = _log_diff1(float(log_ndtr(zb)), la)
    if log_den == -math.inf or math.isnan(log_den):
        return math.nan
    ratio = math.exp(_log_diff1(float(log_ndtr(zx)), la) - log_den)
    ratio = min(max(ratio, 0.0), 1.0)
    return 1.0 - ratio if flip else ratio


def truncnorm_sf(x, mean, sd, lower, upper):
    """P(X >= x), computed by reflection so small tails stay accurate."""
    mean = np.asarray(mean, dtype=float)
    return truncnorm_cdf(-x, -mean, sd, -upper, -lower)

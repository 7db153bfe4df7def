"""Sample splitting: select on one half of the rows, infer on the other."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import RankDeficientError
from .classical import OlsFit, SelectiveInterval, ols_fit, wald_ci


@dataclass(eq=False)
class SplitResult:
    model: tuple
    intervals: list
    fit: OlsFit | None
    rows_select: np.ndarray
    rows_infer: np.ndarray
    selection: object = None


def split_rows(n, rng):
    """Random halves; with odd ``n`` the extra row goes to the inference half."""
    perm = rng.permutation(n)
    n_a = n // 2
    return np.sort(perm[:n_a]), np.sort(perm[n_a:])


def split_inference(x_std, y, selector, alpha=0.1, rng=None) -> SplitResult:
    """Select with ``selector(x, y, rng)`` on half A, Wald intervals from OLS on half B.

    ``selector`` must return an object with a ``model`` attribute (an index
    tuple).  Columns are used as given on both halves, so slopes stay on the
    full-data standardized scale.
    """
    x = np.asarray(x_std, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    if n < 4 + 2 * p:
        raise ValueError(f"splitting needs n >= 4 + 2p (n={n}, p={p})")
    rng = np.random.default_rng(rng)
    rows_a, rows_b = split_rows(n, rng)
    selection = selector(x[rows_a], y[rows_a], rng)
    model = tuple(selection.model)
    if not model:
        return SplitResult(model, [], None, rows_a, rows_b, selection)
    if len(model) >= rows_b.size - 1:
        raise RankDeficientError(model, f"model of size {len(model)} too large for {rows_b.size} inference rows")
    fit = ols_fit(x[rows_b], y[rows_b], model)
    intervals: list[SelectiveInterval] = wald_ci(fit, alpha, method="Split")
    return SplitResult(model, intervals, fit, rows_a, rows_b, selection)

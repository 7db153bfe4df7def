"""Bundled real data."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

BODYFAT_PREDICTORS = ("age", "weight", "height", "neck", "chest", "abdom", "hip", "thigh",
                      "knee", "ankle", "biceps", "forearm", "wrist")
BODYFAT_DROPPED_CASE = 39   # 1-based; 363 lb, far outside the rest of the sample
LB_TO_KG = 0.45359237


@dataclass(eq=False)
class TabularData:
    x: np.ndarray
    y: np.ndarray
    names: tuple
    outcome: str


def read_table(path, outcome, predictors=None, delimiter=None) -> TabularData:
    """Numeric delimiter-separated table with a header row.

    The delimiter is sniffed from the header when not given.
    """
    with open(path) as fh:
        header = fh.readline()
    if delimiter is None:
        delimiter = max(",;\t", key=header.count)
    names = [h.strip().strip('"') for h in header.rstrip("\n").split(delimiter)]
    if outcome not in names:
        raise ValueError(f"{path}: outcome column {outcome!r} not found (columns: {names})")
    try:
        raw = np.genfromtxt(path, delimiter=delimiter, skip_header=1, dtype=float,
                            invalid_raise=True)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    raw = np.atleast_2d(raw)
    if np.isnan(raw).any():
        r, c = map(int, np.argwhere(np.isnan(raw))[0])
        raise ValueError(f"{path}: non-numeric or missing value in row {r + 2}, column {names[c]!r}")
    predictors = [n for n in names if n != outcome] if predictors is None else list(predictors)
    missing = [p for p in predictors if p not in names]
    if missing:
        raise ValueError(f"{path}: predictor columns {missing} not found")
    idx = [names.index(p) for p in predictors]
    return TabularData(raw[:, idx], raw[:, names.index(outcome)], tuple(predictors), outcome)


def bodyfat_path():
    return resources.files("selective_lasso") / "data" / "bodyfat.csv"


def load_bodyfat(drop_case=BODYFAT_DROPPED_CASE) -> TabularData:
    """Body-fat data: outcome siri, 13 predictors in the units used for reporting.

    Age is in decades, height in decimetres and weight in kilograms.  See
    ``data/PROVENANCE.txt``.

    Parameters
    ----------
    drop_case : int or None
        1-based row removed before analysis; ``None`` keeps all 252 men.
    """
    with resources.as_file(bodyfat_path()) as path:
        data = read_table(path, "siri", BODYFAT_PREDICTORS)
    x, y = data.x.copy(), data.y.copy()
    x[:, 0] /= 10.0
    x[:, 1] *= LB_TO_KG
    x[:, 2] *= 2.54 / 10.0
    if drop_case is not None:
        if not 1 <= drop_case <= len(y):
            raise ValueError(f"drop_case must be in 1..{len(y)}")
        keep = np.ones(len(y), dtype=bool)
        keep[drop_case - 1] = False
        x, y = x[keep], y[keep]
    return TabularData(x, y, data.names, "siri")

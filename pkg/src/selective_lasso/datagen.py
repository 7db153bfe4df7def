"""Simulated datasets for the toy and realistic setups.

Every dataset follows the same recipe: latent Gaussian columns with a fixed
correlation matrix, a column transform, empirical standardization, a linear
predictor from standardized coefficients and Gaussian noise whose variance
hits the requested R^2 exactly for that draw.  A second noise draw on the
same design gives the validation outcome.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DegenerateDataError

MAX_REDRAWS = 100

TOY_P = 4
REALISTIC_P = 17
REALISTIC_LATENT = 15


@dataclass(frozen=True, eq=False)
class CorrelationDesign:
    """Latent correlation matrix.

    ``specified`` keeps the matrix as written down when it was not positive
    definite and ``sigma`` holds the repaired version that is sampled from.
    """

    name: str
    sigma: np.ndarray
    specified: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ConfigurationError(f"{self.name}: correlation matrix must be square")
        if not np.allclose(s, s.T, atol=0, rtol=0) or not np.all(np.diag(s) == 1.0):
            raise ConfigurationError(f"{self.name}: must be symmetric with unit diagonal")
        object.__setattr__(self, "sigma", s)

    @property
    def is_repaired(self):
        return self.specified is not None

    @property
    def dim(self):
        return self.sigma.shape[0]

    def cholesky(self):
        return np.linalg.cholesky(self.sigma)


@dataclass(frozen=True, eq=False)
class TransformPipeline:
    """Column maps from latent draws ``z`` (n x q) to predictors (n x p).

    ``truncate_multipliers`` holds one entry per output column; a finite
    value ``m`` winsorizes that column at ``median +/- m * IQR``.
    """

    names: tuple
    column_transforms: tuple | None
    truncate_multipliers: np.ndarray

    @property
    def p(self):
        return len(self.names)

    @property
    def is_identity(self):
        return self.column_transforms is None

    def apply(self, z: np.ndarray) -> np.ndarray:
        if self.is_identity:
            x = np.array(z, dtype=float, copy=True)
        else:
            x = np.column_stack([np.asarray(f(z), dtype=float) for f in self.column_transforms])
        return winsorize(x, self.truncate_multipliers)


def winsorize(x: np.ndarray, multipliers) -> np.ndarray:
    multipliers = np.asarray(multipliers, dtype=float)
    if multipliers.size == 0 or not np.isfinite(multipliers).any():
        return x
    x = x.copy()
    for j in np.flatnonzero(np.isfinite(multipliers)):
        q25, q50, q75 = np.percentile(x[:, j], [25, 50, 75])
        half = multipliers[j] * (q75 - q25)
        np.clip(x[:, j], q50 - half, q50 + half, out=x[:, j])
    return x


def identity_pipeline(p: int) -> TransformPipeline:
    return TransformPipeline(
        names=tuple(f"v{j + 1}" for j in range(p)),
        column_transforms=None,
        truncate_multipliers=np.full(p, np.nan),
    )


@dataclass(frozen=True, eq=False)
class CoefficientStructure:
    name: str
    beta: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float)
        if not np.any(b != 0):
            raise ConfigurationError(f"{self.name}: needs at least one nonzero coefficient")
        object.__setattr__(self, "beta", b)

    @property
    def support(self):
        return tuple(int(j) for j in np.flatnonzero(self.beta))


@dataclass(frozen=True, eq=False)
class Scenario:
    setup: str
    correlation: CorrelationDesign
    coefficients: CoefficientStructure
    target_r2: float
    obs_per_variable: int

    @property
    def p(self):
        return self.coefficients.beta.size

    @property
    def n(self):
        return self.obs_per_variable * self.p

    @property
    def id(self):
        return (f"{self.setup}/{self.correlation.name}/{self.coefficients.name}"
                f"/r2={self.target_r2:g}/opv={self.obs_per_variable}")


@dataclass(eq=False)
class Dataset:
    x_raw: np.ndarray
    x_std: np.ndarray
    y: np.ndarray
    y_valid: np.ndarray
    sigma_true: np.ndarray
    beta_true: np.ndarray
    noise_sd: float
    center: np.ndarray = field(default=None)
    scale: np.ndarray = field(default=None)

    @property
    def n(self):
        return self.x_std.shape[0]

    @property
    def p(self):
        return self.x_std.shape[1]

    def swapped(self) -> "Dataset":
        """Same design, training and validation outcomes exchanged."""
        return Dataset(self.x_raw, self.x_std, self.y_valid, self.y, self.sigma_true,
                       self.beta_true, self.noise_sd, self.center, self.scale)


# ---------------------------------------------------------------------------
# toy setup

def _constant(p, rho):
    s = np.full((p, p), float(rho))
    np.fill_diagonal(s, 1.0)
    return s


def _blocks(sizes, rhos):
    p = sum(sizes)
    s = np.zeros((p, p))
    start = 0
    for size, rho in zip(sizes, rhos):
        s[start:start + size, start:start + size] = rho
        start += size
    np.fill_diagonal(s, 1.0)
    return s


_TOY_CORRELATIONS = {
    "uncorrelated": lambda: _constant(4, 0.0),
    "correlated": lambda: _constant(4, 0.8),
    "correlated_neg": lambda: _constant(4, -0.8),
    "blocks_2_2": lambda: _blocks((2, 2), (0.8, 0.8)),
    "blocks_2_2_neg": lambda: _blocks((2, 2), (0.8, -0.8)),
    "blocks_1_3": lambda: _blocks((1, 3), (0.0, 0.8)),
    "blocks_1_3_neg": lambda: _blocks((1, 3), (0.0, -0.8)),
}
TOY_CORRELATION_IDS = tuple(_TOY_CORRELATIONS)

_TOY_COEFFICIENTS = {
    "v1": (1, 0, 0, 0),
    "v12": (1, 1, 0, 0),
    "v12_dec": (1, 0.1, 0, 0),
    "v1234": (1, 1, 1, 1),
    "v13": (1, 0, 1, 0),
    "v13_dec": (1, 0, 0.1, 0),
    "v13_inc": (0.1, 0, 1, 0),
    "v3": (0, 0, 1, 0),
    "v34": (0, 0, 1, 1),
    "v34_dec": (0, 0, 1, 0.1),
}
TOY_COEFFICIENT_IDS = tuple(_TOY_COEFFICIENTS)


def build_toy_correlation(design_id: str) -> CorrelationDesign:
    try:
        factory = _TOY_CORRELATIONS[design_id]
    except KeyError:
        raise ConfigurationError(
            f"unknown toy correlation design {design_id!r}; choose from {TOY_CORRELATION_IDS}"
        ) from None
    return _repaired_design(design_id, factory())


def _repaired_design(name, s):
    fixed = repair_correlation(s)
    if np.array_equal(fixed, s):
        return CorrelationDesign(name, s)
    return CorrelationDesign(name, fixed, specified=s)


# ---------------------------------------------------------------------------
# realistic setup

# (latent i, latent j, correlation), 1-based
REALISTIC_PAIRS = (
    (1, 2, 0.8), (1, 9, 0.5),
    (3, 5, 0.5), (3, 9, -0.8),
    (4, 6, -0.8), (4, 7, -0.5),
    (5, 6, -0.5), (5, 12, 0.8),
    (6, 7, 0.8), (6, 11, 0.8), (6, 14, 0.5),
    (7, 11, 0.5), (7, 14, 0.5),
    (8, 9, -0.5), (8, 11, 0.5),
    (11, 14, 0.8),
)

REALISTIC_NAMES = tuple(f"v{j}" for j in range(1, REALISTIC_P + 1))

_REALISTIC_TRANSFORMS = (
    lambda z: np.floor(10 * z[:, 0] + 55),
    lambda z: z[:, 1] < 0.6,
    lambda z: np.exp(0.4 * z[:, 2] + 3),
    lambda z: z[:, 3] >= -1.2,
    lambda z: z[:, 3] >= 0.75,
    lambda z: np.exp(0.5 * z[:, 4] + 1.5),
    lambda z: np.floor(np.maximum(0, 100 * np.exp(z[:, 5]) - 20)),
    lambda z: np.floor(np.maximum(0, 80 * np.exp(z[:, 6]) - 20)),
    lambda z: z[:, 7] < -0.35,
    lambda z: (z[:, 8] >= 0.5) & (z[:, 8] < 1.5),
    lambda z: z[:, 8] >= 1.5,
    lambda z: 0.01 * np.floor(100 * (z[:, 9] + 4) ** 2),
    lambda z: np.floor(10 * z[:, 10] + 55),
    lambda z: np.floor(10 * z[:, 11] + 55),
    lambda z: np.floor(10 * z[:, 12] + 55),
    lambda z: z[:, 13] < 0,
    lambda z: z[:, 14] < 0,
)

_N = np.nan
REALISTIC_TRUNCATION = np.array([5, _N, 5, _N, _N, 5, 5, 5, _N, _N, _N, 5, 5, 5, 5, _N, _N])

EIGENVALUE_FLOOR = 1e-4


def specified_realistic_correlation() -> np.ndarray:
    """The latent correlation matrix exactly as specified by its 16 pairs.

    This matrix is indefinite (smallest eigenvalue about -0.39); see
    :func:`repair_correlation` for the version that is actually sampled.
    """
    s = np.eye(REALISTIC_LATENT)
    for i, j, rho in REALISTIC_PAIRS:
        s[i - 1, j - 1] = s[j - 1, i - 1] = rho
    return s


def repair_correlation(s: np.ndarray, floor: float = EIGENVALUE_FLOOR) -> np.ndarray:
    """Clip eigenvalues at ``floor`` and rescale back to unit diagonal."""
    w, v = np.linalg.eigh(s)
    if w.min() >= floor:
        return s.copy()
    c = (v * np.maximum(w, floor)) @ v.T
    d = np.sqrt(np.diag(c))
    c = c / np.outer(d, d)
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return c


def build_realistic_design() -> tuple[CorrelationDesign, TransformPipeline]:
    design = _repaired_design("realistic", specified_realistic_correlation())
    pipeline = TransformPipeline(
        names=REALISTIC_NAMES,
        column_transforms=_REALISTIC_TRANSFORMS,
        truncate_multipliers=REALISTIC_TRUNCATION.copy(),
    )
    return design, pipeline


def _realistic_beta(ones=(), tenths=(), negs=()):
    b = np.zeros(REALISTIC_P)
    for vals, v in ((ones, 1.0), (tenths, 0.1), (negs, -1.0)):
        for j in vals:
            b[j - 1] = v
    return tuple(b)


_C2 = (2, 4, 14)
_C3 = (7, 8, 13)
_C4 = (4, 5, 16)

_REALISTIC_COEFFICIENTS = {
    "c2": _realistic_beta(ones=_C2),
    "c3": _realistic_beta(ones=_C3),
    "c34": _realistic_beta(ones=_C3 + _C4),
    "c3w4": _realistic_beta(ones=_C4, tenths=_C3),
    "c34w": _realistic_beta(ones=_C3, tenths=_C4),
    "c3neg4": _realistic_beta(ones=_C4, negs=_C3),
    "c34neg": _realistic_beta(ones=_C3, negs=_C4),
    "c23": _realistic_beta(ones=_C2 + _C3),
    "c2w3": _realistic_beta(ones=_C3, tenths=_C2),
    "c23w": _realistic_beta(ones=_C2, tenths=_C3),
    "c2neg3": _realistic_beta(ones=_C3, negs=_C2),
    "c23neg": _realistic_beta(ones=_C2, negs=_C3),
    "c234": _realistic_beta(ones=_C2 + _C3 + (5, 16)),
}
REALISTIC_COEFFICIENT_IDS = tuple(_REALISTIC_COEFFICIENTS)


def coefficient_structure(setup: str, id: str) -> CoefficientStructure:
    table = {"toy": _TOY_COEFFICIENTS, "realistic": _REALISTIC_COEFFICIENTS}.get(setup)
    if table is None:
        raise ConfigurationError(f"unknown setup {setup!r}")
    if id not in table:
        raise ConfigurationError(f"unknown {setup} coefficient structure {id!r}")
    return CoefficientStructure(id, np.array(table[id], dtype=float))


def pipeline_for(setup: str) -> TransformPipeline:
    if setup == "toy":
        return identity_pipeline(TOY_P)
    if setup == "realistic":
        return build_realistic_design()[1]
    raise ConfigurationError(f"unknown setup {setup!r}")


def correlation_for(setup: str, design_id: str) -> CorrelationDesign:
    if setup == "toy":
        return build_toy_correlation(design_id)
    if setup == "realistic":
        if design_id != "realistic":
            raise ConfigurationError(f"realistic setup has a single design, got {design_id!r}")
        return build_realistic_design()[0]
    raise ConfigurationError(f"unknown setup {setup!r}")


# ---------------------------------------------------------------------------
# sampling

def standardize(x: np.ndarray):
    """Center and scale columns to mean 0 and (n-denominator) SD 1."""
    center = x.mean(axis=0)
    xc = x - center
    scale = np.sqrt(np.mean(xc ** 2, axis=0))
    return xc / np.where(scale > 0, scale, 1.0), center, scale


def _draw_latent(design: CorrelationDesign, n, rng):
    return rng.standard_normal((n, design.dim)) @ design.cholesky().T


def sample_dataset(scenario: Scenario, rng: np.random.Generator,
                   pipeline: TransformPipeline | None = None,
                   sigma_true: np.ndarray | None = None) -> Dataset:
    n, p = scenario.n, scenario.p
    if n < p + 2:
        raise ConfigurationError(f"{scenario.id}: n={n} < p + 2")
    if pipeline is None:
        pipeline = pipeline_for(scenario.setup)
    if sigma_true is None:
        sigma_true = true_sigma(scenario.setup, scenario.correlation)
    beta = scenario.coefficients.beta

    for _ in range(MAX_REDRAWS):
        z = _draw_latent(scenario.correlation, n, rng)
        x_raw = pipeline.apply(z)
        x_std, center, scale = standardize(x_raw)
        # tiny relative spread is a constant column up to rounding
        if np.any(scale <= 1e-12 * np.maximum(1.0, np.abs(center))):
            continue
        eta = x_std @ beta
        noise_sd = float(np.sqrt(eta.var() * (1.0 / scenario.target_r2 - 1.0)))
        y = eta + noise_sd * rng.standard_normal(n)
        y_valid = eta + noise_sd * rng.standard_normal(n)
        return Dataset(x_raw, x_std, y, y_valid, sigma_true, beta.copy(), noise_sd,
                       center, scale)
    raise DegenerateDataError(scenario.id, MAX_REDRAWS)


def population_sigma(design: CorrelationDesign, pipeline: TransformPipeline,
                     n_mc: int, rng: np.random.Generator) -> np.ndarray:
    """Correlation matrix of the standardized transformed predictors."""
    if pipeline.is_identity:
        return design.sigma.copy()
    if n_mc < 100_000:
        raise ConfigurationError("population_sigma needs n_mc >= 1e5")
    x = pipeline.apply(_draw_latent(design, n_mc, rng))
    c = np.corrcoef(x, rowvar=False)
    return 0.5 * (c + c.T)


POPULATION_MC = 1_000_000
POPULATION_SEED = 20210414


@functools.lru_cache(maxsize=None)
def _realistic_sigma_cached():
    design, pipeline = build_realistic_design()
    s = population_sigma(design, pipeline, POPULATION_MC, np.random.default_rng(POPULATION_SEED))
    s.setflags(write=False)
    return s


def true_sigma(setup: str, design: CorrelationDesign) -> np.ndarray:
    """Population covariance of the standardized predictors for a setup."""
    if setup == "toy":
        return design.sigma
    return _realistic_sigma_cached()


# ---------------------------------------------------------------------------
# scenario grids

FULL_R2 = (0.2, 0.5, 0.8)
FULL_OPV = (5, 10, 50)


def make_scenario(setup, correlation_id, coefficient_id, target_r2, obs_per_variable):
    if not 0 < target_r2 < 1:
        raise ConfigurationError(f"target_r2 must be in (0, 1), got {target_r2}")
    if int(obs_per_variable) < 1:
        raise ConfigurationError("obs_per_variable must be a positive integer")
    return Scenario(setup, correlation_for(setup, correlation_id),
                    coefficient_structure(setup, coefficient_id),
                    float(target_r2), int(obs_per_variable))

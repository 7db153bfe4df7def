import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selective_lasso.errors import RankDeficientError
from selective_lasso.datagen import standardize
from selective_lasso.lasso import (
    WEIGHT_CAP,
    adaptive_weights,
    fit_lasso,
    kkt_residual,
    lambda_max,
    lambda_path,
    objective,
    ols_coefficients,
    rescale_for_weights,
)

from conftest import orthonormal_design, random_problem


def soft_threshold(z, lam):
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


def test_orthonormal_matches_soft_threshold(rng):
    for _ in range(20):
        x = orthonormal_design(rng, 40, 4)
        y = x @ rng.normal(0, 2, 4) + 0.5 * rng.standard_normal(40)
        z = x.T @ (y - y.mean())
        lam = rng.uniform(0.1, 2.0)
        fit = fit_lasso(x, y, lam)
        expected = soft_threshold(z, lam)
        expected[np.abs(expected) <= 1e-7] = 0.0
        assert np.max(np.abs(fit.coefficients - expected)) <= 1e-8


def test_zero_penalty_is_least_squares(rng):
    x, y = random_problem(rng)
    fit = fit_lasso(x, y, 0.0)
    np.testing.assert_allclose(fit.coefficients, ols_coefficients(x, y), atol=1e-8)


def test_null_threshold_gives_empty_model(rng):
    x, y = random_problem(rng)
    lmax = lambda_max(x, y)
    assert fit_lasso(x, y, lmax).active_set.size == 0
    assert fit_lasso(x, y, 0.99 * lmax).active_set.size >= 1


def test_kkt_and_signs(rng):
    for _ in range(30):
        x, y = random_problem(rng)
        lam = rng.uniform(0.05, 0.9) * lambda_max(x, y)
        w = rng.uniform(0.2, 3.0, 4)
        fit = fit_lasso(x, y, lam, w)
        assert fit.converged
        assert kkt_residual(x, y, fit) <= 1e-6
        np.testing.assert_array_equal(fit.signs, np.sign(fit.coefficients[fit.active_set]))


def test_objective_nonincreasing_over_sweeps(rng):
    x, y = random_problem(rng, rho=0.9)
    trace = np.full(200, np.nan)
    fit = fit_lasso(x, y, 0.1 * lambda_max(x, y), trace=trace)
    vals = trace[: fit.n_iter]
    assert np.all(np.diff(vals) <= 1e-10 * np.abs(vals[:-1]).max())
    assert vals[-1] == pytest.approx(objective(x, y, fit.coefficients, fit.lam), rel=1e-6, abs=1e-9)


def test_column_order_invariance(rng):
    x, y = random_problem(rng, rho=0.6)
    lam = 0.2 * lambda_max(x, y)
    base = fit_lasso(x, y, lam).coefficients
    perm = rng.permutation(4)
    permuted = fit_lasso(x[:, perm], y, lam).coefficients
    assert np.max(np.abs(permuted - base[perm])) <= 1e-8


def test_nonconvergence_is_flagged(rng):
    x, y = random_problem(rng, rho=0.95)
    fit = fit_lasso(x, y, 1e-3, max_sweeps=1)
    assert not fit.converged


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), frac=st.floats(0.02, 0.95))
def test_weighted_equals_rescaled(seed, frac):
    rng = np.random.default_rng(seed)
    x, y = random_problem(rng, rho=0.5)
    w = rng.uniform(0.1, 5.0, 4)
    lam = frac * lambda_max(x, y, w)
    weighted = fit_lasso(x, y, lam, w)
    rescaled = fit_lasso(rescale_for_weights(x, w), y, lam)
    assert np.max(np.abs(rescaled.coefficients / w - weighted.coefficients)) <= 1e-8


def test_active_membership_monotone_in_weight(rng):
    x, y = random_problem(rng, beta=[0.6, 0.4, 0.2, 0.0])
    lam = 0.3 * lambda_max(x, y)
    inside = []
    for wj in np.linspace(0.2, 20.0, 60):
        w = np.ones(4)
        w[2] = wj
        inside.append(2 in fit_lasso(x, y, lam, w).model)
    # once dropped, never re-enters
    assert inside == sorted(inside, reverse=True)


def test_unit_weights_rescale_unchanged(rng):
    x, _ = random_problem(rng)
    np.testing.assert_array_equal(rescale_for_weights(x, np.ones(4)), x)


def test_adaptive_weights_reciprocal_and_cap():
    # two orthonormal columns with y = 2 x1 + 0.5 x2 exactly
    x = np.array([[1.0, 1], [1, -1], [-1, 1], [-1, -1], [0, 0]]) / 2
    y = x @ np.array([2.0, 0.5])
    np.testing.assert_allclose(adaptive_weights(x, y), [0.5, 2.0])
    y0 = x @ np.array([2.0, 0.0])
    assert adaptive_weights(x, y0)[1] == WEIGHT_CAP


def test_adaptive_weights_permutation_equivariant(rng):
    x, y = random_problem(rng)
    perm = rng.permutation(4)
    np.testing.assert_allclose(adaptive_weights(x[:, perm], y), adaptive_weights(x, y)[perm])


def test_rank_deficient_names_columns(rng):
    x, y = random_problem(rng)
    x = np.column_stack([x, x[:, 1] + x[:, 3]])
    with pytest.raises(RankDeficientError) as err:
        adaptive_weights(x, y)
    assert set(err.value.columns) == {1, 3, 4}


def test_lambda_path_shape(rng):
    x, y = random_problem(rng)
    path = lambda_path(x, y, n_lambda=100, min_ratio=1e-3)
    assert path.size == 100 and np.all(np.diff(path) < 0)
    assert path[0] / path[-1] == pytest.approx(1e3)
    assert fit_lasso(x, y, path[0]).active_set.size == 0
    with pytest.raises(ValueError):
        lambda_path(x, y, n_lambda=1)


def test_near_singular_design_converges_quickly():
    # equicorrelation -1/3 in four variables: smallest eigenvalue ~0
    sigma = np.full((4, 4), -1 / 3) + (4 / 3) * np.eye(4)
    sigma += 1e-4 * np.eye(4)
    sigma /= sigma[0, 0]
    rng = np.random.default_rng(7)
    x, _, _ = standardize(rng.multivariate_normal(np.zeros(4), sigma, 18))
    y = x[:, 0] + rng.standard_normal(18)
    lam = 1e-3 * lambda_max(x, y)
    fit = fit_lasso(x, y, lam)
    assert fit.converged and fit.n_iter < 1000
    assert kkt_residual(x, y, fit) <= 1e-6


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-4, 0.1), st.floats(0.001, 0.9))
def test_kkt_on_ill_conditioned_designs(seed, floor, frac):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    cov = q @ np.diag([floor, 0.5, 1.0, 1.5, 2.0]) @ q.T
    x, _, _ = standardize(rng.multivariate_normal(np.zeros(5), cov, 30))
    y = x @ rng.standard_normal(5) + rng.standard_normal(30)
    fit = fit_lasso(x, y, frac * lambda_max(x, y))
    assert fit.converged
    assert kkt_residual(x, y, fit) <= 1e-6 * max(1.0, np.abs(y).max())

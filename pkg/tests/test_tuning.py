import numpy as np
import pytest

from selective_lasso.datagen import make_scenario, sample_dataset, standardize
from selective_lasso.errors import ConfigurationError
from selective_lasso.lasso import fit_on_path
from selective_lasso.tuning import cv_lambda, fold_indices, negahban_lambda

from conftest import random_problem


def test_folds_partition_rows(rng):
    folds = fold_indices(23, 10, rng)
    assert len(folds) == 10
    assert sorted(np.concatenate(folds)) == list(range(23))
    assert max(map(len, folds)) - min(map(len, folds)) <= 1


def test_cv_picks_grid_minimum_and_is_deterministic(rng):
    x, y = random_problem(rng)
    a = cv_lambda(x, y, rng=np.random.default_rng(5))
    b = cv_lambda(x, y, rng=np.random.default_rng(5))
    assert a.lam == b.lam and a.lam in a.lambdas
    assert a.cv_mean[a.index] == a.cv_mean.min()
    curve = a.cv_curve()
    assert curve.shape == (100, 3)


def test_cv_ties_go_to_larger_lambda():
    # pure intercept data: every lambda that zeroes the slopes ties
    rng = np.random.default_rng(0)
    x, _, _ = standardize(rng.standard_normal((40, 3)))
    y = np.ones(40)
    res = cv_lambda(x, y, rng=rng, lambdas=np.array([3.0, 2.0, 1.0]))
    assert res.index == 0


def test_cv_requires_two_rows_per_fold(rng):
    x, y = random_problem(rng, n=15)
    with pytest.raises(ConfigurationError):
        cv_lambda(x, y, k=10, rng=rng)


def test_cv_pure_noise_gives_sparse_models():
    rng = np.random.default_rng(1)
    sizes = []
    for _ in range(200):
        x, _, _ = standardize(rng.standard_normal((200, 4)))
        y = rng.standard_normal(200)
        res = cv_lambda(x, y, rng=rng, n_lambda=50)
        sizes.append(fit_on_path(x, y, res.lambdas, res.index).active_set.size)
    assert np.median(sizes) <= 1


def test_cv_keeps_strong_predictor():
    s = make_scenario("toy", "uncorrelated", "v1", 0.8, 10)
    rng = np.random.default_rng(2)
    hits = 0
    for _ in range(200):
        d = sample_dataset(s, rng)
        res = cv_lambda(d.x_std, d.y, rng=rng, n_lambda=50)
        hits += 0 in fit_on_path(d.x_std, d.y, res.lambdas, res.index).model
    assert hits / 200 >= 0.99


def test_negahban_linear_in_sigma_and_ignores_y(rng):
    x, _ = random_problem(rng)
    a = negahban_lambda(x, 1.0, rng=np.random.default_rng(3)).lam
    b = negahban_lambda(x, 2.0, rng=np.random.default_rng(3)).lam
    assert b == pytest.approx(2 * a, rel=1e-14)
    # nondecreasing in sigma with common random numbers
    lams = [negahban_lambda(x, s, rng=np.random.default_rng(3)).lam for s in (0.5, 1, 1.5)]
    assert lams == sorted(lams)


def test_negahban_default_draws_and_validation(rng):
    x, _ = random_problem(rng)
    assert negahban_lambda.__defaults__[0] == 1000
    with pytest.raises(ValueError):
        negahban_lambda(x, 0.0)
    with pytest.raises(ValueError):
        negahban_lambda(x, 1.0, n_mc=50)


def test_negahban_half_normal_oracle():
    n = 50
    x = np.r_[np.ones(n // 2), -np.ones(n // 2)][:, None]   # mean 0, unit SD, norm sqrt(n)
    lam = negahban_lambda(x, 1.3, n_mc=100_000, rng=np.random.default_rng(4)).lam
    assert lam / 2 == pytest.approx(1.3 * np.sqrt(2 * n / np.pi), rel=0.02)

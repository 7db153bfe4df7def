import numpy as np
import pytest

from selective_lasso import datagen
from selective_lasso.datagen import (
    REALISTIC_COEFFICIENT_IDS,
    TOY_COEFFICIENT_IDS,
    TOY_CORRELATION_IDS,
    CorrelationDesign,
    TransformPipeline,
    build_realistic_design,
    build_toy_correlation,
    coefficient_structure,
    make_scenario,
    population_sigma,
    sample_dataset,
    true_sigma,
)
from selective_lasso.errors import ConfigurationError, DegenerateDataError


def test_toy_designs_shapes_and_values():
    np.testing.assert_array_equal(build_toy_correlation("uncorrelated").sigma, np.eye(4))
    s = build_toy_correlation("correlated").sigma
    assert np.all(s[~np.eye(4, dtype=bool)] == 0.8)
    d = build_toy_correlation("blocks_1_3_neg")
    s = d.specified
    expected = np.eye(4)
    expected[1:, 1:] = np.where(np.eye(3, dtype=bool), 1.0, -0.8)
    np.testing.assert_array_equal(s, expected)
    # -0.8 within a 3x3 block is not a correlation matrix; the sampled one is repaired
    assert d.is_repaired and np.linalg.eigvalsh(d.sigma).min() > 0
    np.testing.assert_allclose(d.sigma[1, 2], -0.5, atol=1e-3)
    s = build_toy_correlation("blocks_2_2_neg").sigma
    assert s[0, 1] == 0.8 and s[2, 3] == -0.8 and s[0, 2] == 0.0


@pytest.mark.parametrize("design_id", TOY_CORRELATION_IDS)
def test_toy_designs_are_valid_correlations(design_id):
    d = build_toy_correlation(design_id)
    np.testing.assert_array_equal(d.sigma, d.sigma.T)
    np.testing.assert_array_equal(np.diag(d.sigma), 1.0)
    d.cholesky()
    assert np.linalg.eigvalsh(d.sigma).min() > 0
    if not d.is_repaired:
        assert design_id in ("uncorrelated", "correlated", "blocks_2_2", "blocks_2_2_neg", "blocks_1_3")


def test_unknown_ids_are_configuration_errors():
    with pytest.raises(ConfigurationError):
        build_toy_correlation("nope")
    with pytest.raises(ConfigurationError):
        coefficient_structure("toy", "v99")
    with pytest.raises(ConfigurationError):
        coefficient_structure("mystery", "v1")


def test_coefficient_tables():
    np.testing.assert_array_equal(coefficient_structure("toy", "v12_dec").beta, [1, 0.1, 0, 0])
    np.testing.assert_array_equal(coefficient_structure("toy", "v1234").beta, [1, 1, 1, 1])
    c2 = coefficient_structure("realistic", "c2").beta
    assert set(np.flatnonzero(c2) + 1) == {2, 4, 14} and np.all(c2[[1, 3, 13]] == 1)
    assert len(TOY_COEFFICIENT_IDS) == 10 and len(REALISTIC_COEFFICIENT_IDS) == 13
    for setup, ids in (("toy", TOY_COEFFICIENT_IDS), ("realistic", REALISTIC_COEFFICIENT_IDS)):
        for cid in ids:
            b = coefficient_structure(setup, cid).beta
            assert set(np.unique(b)) <= {-1.0, 0.0, 0.1, 1.0} and np.any(b != 0)


def test_realistic_negated_clusters():
    b = coefficient_structure("realistic", "c3neg4").beta
    assert np.all(b[[6, 7, 12]] == -1) and np.all(b[[3, 4, 15]] == 1)
    b = coefficient_structure("realistic", "c23neg").beta
    assert np.all(b[[6, 7, 12]] == -1) and np.all(b[[1, 3, 13]] == 1)


def test_realistic_design_structure():
    design, pipeline = build_realistic_design()
    assert design.dim == 15 and pipeline.p == 17
    design.cholesky()
    spec = datagen.specified_realistic_correlation()
    nonzero = np.argwhere(np.triu(spec, 1) != 0)
    assert len(nonzero) == 16
    assert spec[0, 1] == 0.8 and spec[2, 8] == -0.8
    # the repair only shrinks towards a valid matrix
    assert np.max(np.abs(design.sigma - spec)) < 0.2


def test_realistic_transform_examples():
    _, pipeline = build_realistic_design()
    z = np.zeros((1, 15))
    raw = np.column_stack([f(z) for f in pipeline.column_transforms]).astype(float)[0]
    assert raw[0] == 55 and raw[3] == 1 and raw[4] == 0
    assert raw[2] == pytest.approx(np.exp(3.0))
    assert raw[11] == 16.0


def test_sample_dataset_invariants(rng):
    s = make_scenario("toy", "correlated", "v12", 0.5, 10)
    d = sample_dataset(s, rng)
    assert d.n == 40 and d.p == 4
    assert np.max(np.abs(d.x_std.mean(axis=0))) <= 1e-10
    assert np.max(np.abs(d.x_std.std(axis=0) - 1)) <= 1e-10
    eta = d.x_std @ d.beta_true
    assert d.noise_sd ** 2 == pytest.approx(eta.var())
    assert eta.var() / (eta.var() + d.noise_sd ** 2) == pytest.approx(0.5, abs=1e-12)
    e, ev = d.y - eta, d.y_valid - eta
    assert not np.allclose(e, ev)
    swapped = d.swapped()
    np.testing.assert_array_equal(swapped.y, d.y_valid)
    np.testing.assert_array_equal(swapped.x_std, d.x_std)


@pytest.mark.parametrize("r2", [0.2, 0.5, 0.8])
def test_realized_r2_exact(r2, rng):
    s = make_scenario("realistic", "realistic", "c34", r2, 5)
    d = sample_dataset(s, rng)
    assert d.n == 85
    var_eta = (d.x_std @ d.beta_true).var()
    assert var_eta / (var_eta + d.noise_sd ** 2) == pytest.approx(r2, abs=1e-12)


def test_constant_column_triggers_redraw_cap(rng):
    s = make_scenario("toy", "uncorrelated", "v1", 0.5, 5)
    stuck = TransformPipeline(("a", "b", "c", "d"),
                              (lambda z: z[:, 0], lambda z: z[:, 1], lambda z: z[:, 2],
                               lambda z: np.ones(len(z))), np.full(4, np.nan))
    with pytest.raises(DegenerateDataError) as err:
        sample_dataset(s, rng, pipeline=stuck, sigma_true=np.eye(4))
    assert err.value.scenario_id == s.id


def test_population_sigma_toy_is_input(rng):
    for did in ("uncorrelated", "correlated"):
        d = build_toy_correlation(did)
        np.testing.assert_array_equal(
            population_sigma(d, datagen.identity_pipeline(4), 100_000, rng), d.sigma)


def test_population_sigma_realistic():
    s = true_sigma("realistic", build_realistic_design()[0])
    np.testing.assert_array_equal(s, s.T)
    np.testing.assert_allclose(np.diag(s), 1.0)
    assert 0.4 < s[6, 7] < 0.9
    assert np.linalg.eigvalsh(s).min() > 0


def test_population_sigma_requires_enough_draws(rng):
    design, pipeline = build_realistic_design()
    with pytest.raises(ConfigurationError):
        population_sigma(design, pipeline, 1000, rng)


def test_winsorize_clips_outliers():
    x = np.concatenate([np.arange(100.0), [1e6]])[:, None]
    w = datagen.winsorize(x, [5.0])
    q25, q50, q75 = np.percentile(x, [25, 50, 75])
    assert w.max() == pytest.approx(q50 + 5 * (q75 - q25))
    np.testing.assert_array_equal(w[:100], x[:100])


def test_correlation_design_validation():
    with pytest.raises(ValueError):
        CorrelationDesign("bad", np.array([[1.0, 0.5], [0.4, 1.0]]))

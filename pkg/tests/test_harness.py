import json

import numpy as np
import pytest

from selective_lasso.datagen import make_scenario
from selective_lasso.errors import ConfigurationError
from selective_lasso.harness import (
    METHOD_IDS,
    RECORD_COLUMNS,
    CorruptRecordsError,
    HarnessOptions,
    bootstrap_selection_frequencies,
    component_rng,
    default_workers,
    enumerate_scenarios,
    read_records,
    resolve_methods,
    run_iteration,
    run_scenario,
)
from selective_lasso.selection import make_selector

from conftest import random_problem

SCEN = make_scenario("toy", "correlated", "v12", 0.5, 10)
FAST = ["Full", "Oracle", "Lasso-CV-SI", "Lasso-Neg-SI", "Lasso-CV-Split"]


def test_grid_sizes_and_order():
    toy = enumerate_scenarios("toy-full")
    real = enumerate_scenarios("realistic-full")
    assert len(toy) == 630 and len(real) == 117
    assert len({s.id for s in toy}) == 630
    assert toy[0].id == "toy/uncorrelated/v1/r2=0.2/opv=5"
    keys = [(s.target_r2, s.obs_per_variable) for s in toy[:9]]
    assert keys == sorted(keys)
    both = enumerate_scenarios({"grids": ["realistic-full", "toy-full"]})
    assert [s.setup for s in both] == ["toy"] * 630 + ["realistic"] * 117


def test_grid_subsets_and_errors():
    cfg = dict(setup="toy", correlations=["blocks_1_3", "uncorrelated"], coefficients=["v1"],
               r2=[0.8, 0.2], opv=[5])
    ids = [s.id for s in enumerate_scenarios(cfg)]
    assert ids[0].startswith("toy/uncorrelated") and len(ids) == 4
    with pytest.raises(ConfigurationError):
        enumerate_scenarios(dict(cfg, opv=[]))
    with pytest.raises(ConfigurationError):
        enumerate_scenarios("toy-partial")
    with pytest.raises(ConfigurationError):
        enumerate_scenarios(dict(cfg, setup="medium"))


def test_methods_resolve_in_table_order():
    got = [m.id for m in resolve_methods("Lasso-CV-SI, Full,Full")]
    assert got == ["Full", "Lasso-CV-SI"]
    assert len(resolve_methods()) == 10
    with pytest.raises(ConfigurationError):
        resolve_methods(["Lasso-CV-Bayes"])
    with pytest.raises(ConfigurationError):
        resolve_methods("")


def test_component_streams_independent_of_each_other():
    a = component_rng(1, "s", 0, "data").standard_normal(3)
    assert np.array_equal(a, component_rng(1, "s", 0, "data").standard_normal(3))
    for other in [(2, "s", 0, "data"), (1, "t", 0, "data"), (1, "s", 1, "data"),
                  (1, "s", 0, "posi")]:
        assert not np.array_equal(a, component_rng(*other).standard_normal(3))


def test_iteration_rows_and_determinism():
    r1 = run_iteration(SCEN, METHOD_IDS, seed=5, iteration=3)
    r2 = run_iteration(SCEN, list(reversed(METHOD_IDS)), seed=5, iteration=3)
    assert list(r1.results) == list(METHOD_IDS)
    for m in METHOD_IDS:
        a, b = r1.results[m], r2.results[m]
        assert len(a.outcomes) == SCEN.p
        assert a.model == b.model and a.failure_code == b.failure_code
        for oa, ob in zip(a.outcomes, b.outcomes):
            assert (oa.lower, oa.upper) == (ob.lower, ob.upper)


def test_shared_selection_across_methods():
    rec = run_iteration(SCEN, ["Lasso-CV-PoSI", "Lasso-CV-SI"], seed=1)
    assert rec.results["Lasso-CV-PoSI"].model == rec.results["Lasso-CV-SI"].model
    alone = run_iteration(SCEN, ["Lasso-CV-SI"], seed=1)
    assert alone.results["Lasso-CV-SI"].model == rec.results["Lasso-CV-SI"].model


def test_full_and_oracle_models():
    rec = run_iteration(SCEN, ["Full", "Oracle"], seed=2)
    assert rec.results["Full"].model == tuple(range(4))
    assert rec.results["Oracle"].model == tuple(SCEN.coefficients.support)
    for o in rec.results["Full"].outcomes:
        assert o.target == pytest.approx(SCEN.coefficients.beta[o.variable])


def test_failure_code_for_empty_selection():
    null = make_scenario("toy", "uncorrelated", "v1", 0.2, 5)
    codes = {run_iteration(null, ["Lasso-Neg-SI"], seed=0, iteration=i)
             .results["Lasso-Neg-SI"].failure_code for i in range(30)}
    assert "no-selection" in codes


def test_design_target_option():
    opts = HarnessOptions(target="design", known_sigma=True)
    rec = run_iteration(SCEN, ["Lasso-CV-SI"], seed=0, options=opts)
    assert all(o.target is not None for o in rec.results["Lasso-CV-SI"].outcomes if o.selected)


def test_workers_do_not_change_results(tmp_path):
    a = run_scenario(SCEN, FAST, 6, master_seed=3, workers=1, out_dir=tmp_path / "a")
    b = run_scenario(SCEN, FAST, 6, master_seed=3, workers=2, out_dir=tmp_path / "b")
    assert a.rows == b.rows and a.conditional == b.conditional
    fa = next((tmp_path / "a" / "records").glob("*.csv")).read_bytes()
    fb = next((tmp_path / "b" / "records").glob("*.csv")).read_bytes()
    assert fa == fb


def test_default_workers(monkeypatch):
    monkeypatch.delenv("SELECTIVE_LASSO_WORKERS", raising=False)
    assert default_workers() == 1
    monkeypatch.setenv("SELECTIVE_LASSO_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("SELECTIVE_LASSO_WORKERS", "many")
    with pytest.raises(ConfigurationError):
        default_workers()


def _record_file(out):
    return next((out / "records").glob("*.csv"))


def test_resume_after_torn_write(tmp_path):
    full = run_scenario(SCEN, FAST, 5, master_seed=8, out_dir=tmp_path / "ref")
    out = tmp_path / "run"
    run_scenario(SCEN, FAST, 5, master_seed=8, out_dir=out)
    path = _record_file(out)
    text = path.read_text()
    header, *lines = text.splitlines(keepends=True)
    assert header.strip().split(",") == list(RECORD_COLUMNS)
    # keep 3 complete iterations, half of the 4th, and a torn line
    per_it = len(FAST) * SCEN.p
    cut = header + "".join(lines[: 3 * per_it + per_it // 2]) + lines[3 * per_it + per_it // 2][:20]
    path.write_text(cut)
    resumed = run_scenario(SCEN, FAST, 5, master_seed=8, out_dir=out)
    assert resumed.rows == full.rows
    assert path.read_bytes() == _record_file(tmp_path / "ref").read_bytes()
    assert len(read_records(path, per_it)) == 5


def test_resume_extends_iterations(tmp_path):
    ref = run_scenario(SCEN, FAST, 6, master_seed=1, out_dir=tmp_path / "ref")
    run_scenario(SCEN, FAST, 3, master_seed=1, out_dir=tmp_path / "run")
    again = run_scenario(SCEN, FAST, 6, master_seed=1, out_dir=tmp_path / "run")
    assert again.rows == ref.rows


def test_crc_mismatch_refuses(tmp_path):
    run_scenario(SCEN, FAST, 3, master_seed=0, out_dir=tmp_path)
    path = _record_file(tmp_path)
    lines = path.read_text().splitlines(keepends=True)
    row = lines[2].split(",")
    row[6] = "0.123" if row[6] != "0.123" else "0.321"
    lines[2] = ",".join(row)
    path.write_text("".join(lines))
    with pytest.raises(CorruptRecordsError):
        run_scenario(SCEN, FAST, 3, master_seed=0, out_dir=tmp_path)


def test_config_mismatch_refuses(tmp_path):
    run_scenario(SCEN, FAST, 2, master_seed=0, out_dir=tmp_path)
    with pytest.raises(CorruptRecordsError):
        run_scenario(SCEN, FAST, 2, master_seed=1, out_dir=tmp_path)
    meta = next((tmp_path / "records").glob("*.meta.json"))
    assert json.loads(meta.read_text())["master_seed"] == 0


def test_summary_rates_consistent(tmp_path):
    s = run_scenario(SCEN, FAST, 20, master_seed=4)
    for row in s.rows:
        rates = [row[k] for k in row if k.startswith("rate_")]
        assert sum(rates) <= 1 + 1e-12
        if row["method"] == "Full":
            assert row["coverage"] is not None and row["n_intervals"] == 20 * SCEN.p
            assert row["true_model_freq"] == 0.0      # v12 has two zero slopes
            assert row["n_zero"] == 2 * 20
        assert row["n_zero"] + row["n_nonzero"] == row["n_intervals"]
    cond = [c for c in s.conditional if c["method"] == "Full"]
    assert [c["variable"] for c in cond] == [1, 2, 3, 4]
    assert all(c["selection_freq"] == 1.0 for c in cond)
    assert [c["n_zero"] for c in cond] == [0, 0, 20, 20]


def test_bootstrap_frequencies(rng):
    x, y = random_problem(rng, n=60, beta=[2.0, 0, 0, 0])
    freq = bootstrap_selection_frequencies(x * 7 + 3, y, make_selector(), 30, rng)
    assert freq.shape == (4,) and freq[0] == 1.0
    assert np.all((0 <= freq) & (freq <= 1))
    with pytest.raises(ValueError):
        bootstrap_selection_frequencies(x, y, make_selector(), 0)

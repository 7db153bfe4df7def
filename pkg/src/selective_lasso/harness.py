"""Simulation grid runner.

Every iteration draws its own random streams from
``SeedSequence([master_seed, crc32(scenario_id), iteration, crc32(component)])``
so records do not depend on execution order or worker count.  Components
are named after what consumes them ("data", "Lasso-CV", "posi", ...), which
lets methods that share a selector (e.g. Lasso-CV-PoSI and Lasso-CV-SI)
share the selection as well.

Records are written one row per (iteration, method, variable) with a CRC
of the row text in the last column.  A torn final line or a partially
written final iteration is discarded on resume; any other damage stops the
resume.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import datagen
from .errors import (
    ConfigurationError,
    DegenerateDataError,
    InternalConsistencyError,
    RankDeficientError,
    SelectiveLassoError,
)
from .estimands import (
    REALISTIC_ZERO_TOL,
    TOY_ZERO_TOL,
    VariableOutcome,
    aggregate_conditional,
    aggregate_general,
    design_target,
    selection_metrics,
    submodel_target,
    validation_r2,
    width_summary,
)
from .inference.classical import full_model_sigma, ols_fit, wald_ci
from .inference.polyhedral import selective_ci_exact
from .inference.posi import DEFAULT_DRAWS, REALISTIC_DRAWS, posi_ci, posi_constant
from .inference.split import split_inference
from .selection import make_selector, select

log = logging.getLogger(__name__)

WORKERS_ENV = "SELECTIVE_LASSO_WORKERS"

FAILURE_CODES = ("no-selection", "rank-deficient", "non-converged", "degenerate-interval",
                 "inconsistency")


# ---------------------------------------------------------------------------
# methods

@dataclass(frozen=True)
class MethodSpec:
    id: str
    penalty: str | None = None     # Lasso | ALasso
    tuner: str | None = None       # CV | Neg
    inference: str = "Wald"        # Wald | Split | PoSI | SI

    @property
    def selector_key(self):
        return None if self.penalty is None else f"{self.penalty}-{self.tuner}"


METHOD_IDS = (
    "Full", "Oracle",
    "Lasso-CV-Split", "Lasso-CV-PoSI", "Lasso-CV-SI", "Lasso-Neg-SI",
    "ALasso-CV-Split", "ALasso-CV-PoSI", "ALasso-CV-SI", "ALasso-Neg-SI",
)


def method_spec(method_id: str) -> MethodSpec:
    if method_id in ("Full", "Oracle"):
        return MethodSpec(method_id)
    if method_id not in METHOD_IDS:
        raise ConfigurationError(f"unknown method id {method_id!r}; choose from {METHOD_IDS}")
    penalty, tuner, inference = method_id.split("-")
    return MethodSpec(method_id, penalty, tuner, inference)


def resolve_methods(ids=None):
    ids = METHOD_IDS if ids is None else ids
    if isinstance(ids, str):
        ids = [s.strip() for s in ids.split(",") if s.strip()]
    specs = [method_spec(m) for m in ids]
    if not specs:
        raise ConfigurationError("method list is empty")
    # keep the table order so record files do not depend on how methods were listed
    return sorted(set(specs), key=lambda m: METHOD_IDS.index(m.id))


# ---------------------------------------------------------------------------
# scenario grids

GRIDS = {
    "toy-full": dict(setup="toy", correlations=list(datagen.TOY_CORRELATION_IDS),
                     coefficients=list(datagen.TOY_COEFFICIENT_IDS),
                     r2=list(datagen.FULL_R2), opv=list(datagen.FULL_OPV)),
    "realistic-full": dict(setup="realistic", correlations=["realistic"],
                           coefficients=list(datagen.REALISTIC_COEFFICIENT_IDS),
                           r2=list(datagen.FULL_R2), opv=list(datagen.FULL_OPV)),
}
_SETUP_ORDER = ("toy", "realistic")


def _factor_order(setup):
    if setup == "toy":
        return datagen.TOY_CORRELATION_IDS, datagen.TOY_COEFFICIENT_IDS
    return ("realistic",), datagen.REALISTIC_COEFFICIENT_IDS


def _as_blocks(config):
    if isinstance(config, str):
        config = {"grid": config}
    if "grids" in config:
        blocks = []
        for g in config["grids"]:
            blocks += _as_blocks(g)
        return blocks
    if "grid" in config:
        if config["grid"] not in GRIDS:
            raise ConfigurationError(f"unknown grid {config['grid']!r}; built-ins: {sorted(GRIDS)}")
        block = dict(GRIDS[config["grid"]])
        block.update({k: v for k, v in config.items() if k in block})
        return [block]
    return [config]


def enumerate_scenarios(config) -> list:
    """Full-factorial scenario list in canonical order.

    Order: setup (toy, realistic), correlation and coefficient ids in their
    table order, R^2 ascending, observations per variable ascending.
    ``config`` is a built-in grid name, or a mapping with ``setup``,
    ``correlations``, ``coefficients``, ``r2``, ``opv`` (or ``grid`` /
    ``grids``).
    """
    scenarios = {}
    for block in _as_blocks(config):
        setup = block.get("setup")
        if setup not in _SETUP_ORDER:
            raise ConfigurationError(f"unknown setup {setup!r}")
        factors = {}
        for key in ("correlations", "coefficients", "r2", "opv"):
            vals = block.get(key)
            if vals is None and key == "correlations" and setup == "realistic":
                vals = ["realistic"]
            if not vals:
                raise ConfigurationError(f"factor {key!r} is empty for setup {setup!r}")
            factors[key] = list(vals)
        for c in factors["correlations"]:
            for b in factors["coefficients"]:
                for r2 in factors["r2"]:
                    for opv in factors["opv"]:
                        s = datagen.make_scenario(setup, c, b, float(r2), int(opv))
                        scenarios[s.id] = s
    corr_rank = {s: {c: i for i, c in enumerate(_factor_order(s)[0])} for s in _SETUP_ORDER}
    coef_rank = {s: {c: i for i, c in enumerate(_factor_order(s)[1])} for s in _SETUP_ORDER}
    return sorted(scenarios.values(), key=lambda s: (
        _SETUP_ORDER.index(s.setup), corr_rank[s.setup][s.correlation.name],
        coef_rank[s.setup][s.coefficients.name], s.target_r2, s.obs_per_variable))


def load_config(path):
    """Read a YAML or JSON run configuration."""
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return json.loads(text)
    import yaml
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a mapping at top level")
    return data


# ---------------------------------------------------------------------------
# seeding

def component_rng(master_seed, scenario_id, iteration, component):
    ss = np.random.SeedSequence([int(master_seed), zlib.crc32(scenario_id.encode()),
                                 int(iteration), zlib.crc32(component.encode())])
    return np.random.default_rng(ss)


# ---------------------------------------------------------------------------
# one iteration

@dataclass
class HarnessOptions:
    alpha: float = 0.1
    target: str = "population"      # population | design
    known_sigma: bool = False
    posi_draws: int | None = None
    zero_tol: float | None = None

    def draws_for(self, setup):
        if self.posi_draws is not None:
            return self.posi_draws
        return REALISTIC_DRAWS if setup == "realistic" else DEFAULT_DRAWS

    def zero_tol_for(self, setup):
        if self.zero_tol is not None:
            return self.zero_tol
        return REALISTIC_ZERO_TOL if setup == "realistic" else TOY_ZERO_TOL


@dataclass(eq=False)
class MethodOutcome:
    method: str
    model: tuple
    outcomes: list
    val_r2: float | None
    failure_code: str = ""
    lam: float | None = None
    seconds: float = 0.0


@dataclass(eq=False)
class IterationRecord:
    scenario_id: str
    iteration: int
    master_seed: int
    results: dict = field(default_factory=dict)


class _Context:
    """Lazily computed quantities shared by the methods of one iteration."""

    def __init__(self, scenario, data, master_seed, iteration, options):
        self.scenario, self.data, self.options = scenario, data, options
        self.master_seed, self.iteration = master_seed, iteration
        self._selections, self._posi, self._sigma = {}, None, None

    def rng(self, component):
        return component_rng(self.master_seed, self.scenario.id, self.iteration, component)

    def sigma(self):
        """(sigma, df) used by SI / PoSI."""
        if self._sigma is None:
            if self.options.known_sigma:
                self._sigma = (self.data.noise_sd, np.inf)
            else:
                self._sigma = full_model_sigma(self.data.x_std, self.data.y)
        return self._sigma

    def selection(self, spec):
        key = spec.selector_key
        if key not in self._selections:
            sigma = self.sigma()[0] if spec.tuner == "Neg" else None
            self._selections[key] = select(self.data.x_std, self.data.y, spec.penalty,
                                           spec.tuner, self.rng(key), sigma_hat=sigma)
        return self._selections[key]

    def posi(self):
        if self._posi is None:
            _, df = self.sigma()
            self._posi = posi_constant(self.data.x_std, self.options.alpha, df=df,
                                       n_mc=self.options.draws_for(self.scenario.setup),
                                       rng=self.rng("posi"))
        return self._posi

    def targets(self, model, x_rows=None):
        if not model:
            return {}
        if self.options.target == "design":
            x = self.data.x_std if x_rows is None else self.data.x_std[x_rows]
            t = design_target(x, self.data.beta_true, model)
        else:
            t = submodel_target(self.data.sigma_true, self.data.beta_true, model)
        return t.as_dict()


def _run_method(spec: MethodSpec, ctx: _Context):
    """Returns (model, intervals, prediction, lam, target rows)."""
    data = ctx.data
    x, y = data.x_std, data.y
    alpha = ctx.options.alpha
    if spec.inference == "Wald":
        model = (tuple(range(data.p)) if spec.id == "Full"
                 else tuple(int(j) for j in np.flatnonzero(data.beta_true)))
        if ctx.options.known_sigma:
            fit = ols_fit(x, y, model, sigma=data.noise_sd)
        else:
            fit = ols_fit(x, y, model)
        return model, wald_ci(fit, alpha, method=spec.id), fit.predict(x), None, None

    if spec.inference == "Split":
        selector = make_selector(spec.penalty, spec.tuner)
        res = split_inference(x, y, selector, alpha, ctx.rng(spec.id))
        if res.fit is not None and ctx.options.known_sigma:
            fit = ols_fit(x[res.rows_infer], y[res.rows_infer], res.model, sigma=data.noise_sd)
            res.intervals = wald_ci(fit, alpha, method=spec.id)
            res.fit = fit
        pred = res.fit.predict(x) if res.fit is not None else np.full(data.n, y[res.rows_infer].mean())
        if res.selection is not None and not res.selection.converged:
            raise _NonConverged(res.model)
        return res.model, res.intervals, pred, res.selection.lam, res.rows_infer

    sel = ctx.selection(spec)
    if not sel.converged:
        raise _NonConverged(sel.model)
    model = sel.model
    refit = ols_fit(x, y, model)
    pred = refit.predict(x)
    if not model:
        return model, [], pred, sel.lam, None
    sigma, df = ctx.sigma()
    if spec.inference == "PoSI":
        fit = ols_fit(x, y, model, sigma=sigma, df=df)
        intervals = posi_ci(fit, ctx.posi(), method=spec.id)
    else:
        intervals = selective_ci_exact(x, y, sel.fit, sigma, alpha, method=spec.id)
    return model, intervals, pred, sel.lam, None


class _NonConverged(Exception):
    def __init__(self, model):
        self.model = model


def _variable_rows(iteration, spec, p, model, intervals, targets, zero_tol, failure):
    by_var = {iv.variable: iv for iv in intervals}
    rows = []
    for j in range(p):
        o = VariableOutcome(iteration, spec.id, j, j in model, failure_code=failure)
        iv = by_var.get(j)
        if iv is not None and j in targets:
            t = float(targets[j])
            o.target = t
            o.estimate, o.lower, o.upper, o.p_value = iv.estimate, iv.lower, iv.upper, iv.p_value
            o.covered = bool(iv.covers(t))
            o.excludes_zero = bool(iv.excludes_zero)
            o.width = float(iv.width)
            o.flag_infinite, o.flag_excludes_estimate = iv.flag_infinite, iv.flag_excludes_estimate
        rows.append(o)
    return rows


def run_iteration(scenario, methods, seed, iteration=0, options: HarnessOptions | None = None):
    """Draw one dataset and run every method on it.

    Failures are recorded per method as a failure code; only data
    generation errors propagate.
    """
    options = options or HarnessOptions()
    methods = resolve_methods([m.id if isinstance(m, MethodSpec) else m for m in methods])
    rng = component_rng(seed, scenario.id, iteration, "data")
    data = datagen.sample_dataset(scenario, rng)
    ctx = _Context(scenario, data, seed, iteration, options)
    zero_tol = options.zero_tol_for(scenario.setup)
    record = IterationRecord(scenario.id, iteration, int(seed))
    for spec in methods:
        start = time.perf_counter()
        failure, model, intervals, pred, lam, rows_b = "", (), [], None, None, None
        try:
            model, intervals, pred, lam, rows_b = _run_method(spec, ctx)
            if not model:
                failure = "no-selection"
            elif any(iv.flag_infinite and np.isnan(iv.p_value) for iv in intervals):
                failure = "degenerate-interval"
        except _NonConverged as exc:
            failure, model = "non-converged", exc.model
        except RankDeficientError:
            failure = "rank-deficient"
        except InternalConsistencyError:
            failure = "inconsistency"
        except ConfigurationError:
            raise
        except (SelectiveLassoError, np.linalg.LinAlgError) as exc:
            log.warning("%s iteration %d %s: %s", scenario.id, iteration, spec.id, exc)
            failure = "rank-deficient"
        if failure in ("rank-deficient", "inconsistency", "non-converged"):
            intervals, pred = [], None
        targets = ctx.targets(model, rows_b) if intervals else {}
        val = validation_r2(data.y_valid, pred) if pred is not None else None
        rows = _variable_rows(iteration, spec, data.p, model, intervals, targets, zero_tol, failure)
        record.results[spec.id] = MethodOutcome(spec.id, tuple(model), rows, val, failure, lam,
                                                time.perf_counter() - start)
    return record


# ---------------------------------------------------------------------------
# record files

RECORD_COLUMNS = (
    "scenario", "iteration", "method", "variable", "selected", "estimate", "lower", "upper",
    "p_value", "target", "covered", "excludes_zero", "width", "flag_infinite",
    "flag_excludes_estimate", "failure_code", "val_r2", "master_seed", "crc",
)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _row_text(fields):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="").writerow(fields)
    return buf.getvalue()


def _record_lines(record: IterationRecord):
    lines = []
    for res in record.results.values():
        for o in res.outcomes:
            fields = [record.scenario_id, o.iteration, o.method, o.variable, o.selected,
                      o.estimate, o.lower, o.upper, o.p_value, o.target, o.covered,
                      o.excludes_zero, o.width, o.flag_infinite, o.flag_excludes_estimate,
                      o.failure_code, res.val_r2, record.master_seed]
            text = _row_text([_fmt(f) for f in fields])
            lines.append(f"{text},{zlib.crc32(text.encode()):08x}\n")
    return lines


def _parse_opt(s, conv):
    return None if s == "" else conv(s)


def _to_bool(s):
    return s == "1"


def _parse_row(row):
    o = VariableOutcome(
        iteration=int(row[1]), method=row[2], variable=int(row[3]), selected=_to_bool(row[4]),
        estimate=_parse_opt(row[5], float), lower=_parse_opt(row[6], float),
        upper=_parse_opt(row[7], float), p_value=_parse_opt(row[8], float),
        target=_parse_opt(row[9], float), covered=_parse_opt(row[10], _to_bool),
        excludes_zero=_parse_opt(row[11], _to_bool), width=_parse_opt(row[12], float),
        flag_infinite=_to_bool(row[13]), flag_excludes_estimate=_to_bool(row[14]),
        failure_code=row[15],
    )
    return o, _parse_opt(row[16], float)


class CorruptRecordsError(SelectiveLassoError):
    """Existing record file cannot be resumed safely."""


def read_records(path, rows_per_iteration=None, *, repair=False):
    """Parse a record file; returns {iteration: [(outcome, val_r2), ...]}.

    With ``repair`` a torn last line and an unfinished last iteration are
    cut from the file.  Any other inconsistency raises
    :class:`CorruptRecordsError`.
    """
    path = Path(path)
    raw = path.read_bytes()
    lines = raw.decode().splitlines(keepends=True)
    header = _row_text(RECORD_COLUMNS) + "\n"
    if not lines or lines[0] != header:
        raise CorruptRecordsError(f"{path}: missing or unexpected header")
    keep_bytes = len(lines[0].encode())
    groups: dict[int, list] = {}
    order = []
    torn = False
    for k, line in enumerate(lines[1:], start=2):
        if not line.endswith("\n"):
            if k == len(lines):
                torn = True
                break
        text, _, crc = line.rstrip("\n").rpartition(",")
        if f"{zlib.crc32(text.encode()):08x}" != crc:
            raise CorruptRecordsError(f"{path}:{k}: integrity check failed")
        row = next(csv.reader([text]))
        outcome, val = _parse_row(row)
        if outcome.iteration not in groups:
            if order and rows_per_iteration and len(groups[order[-1]]) != rows_per_iteration:
                raise CorruptRecordsError(f"{path}:{k}: iteration {order[-1]} is incomplete")
            groups[outcome.iteration] = []
            order.append(outcome.iteration)
        groups[outcome.iteration].append((outcome, val, len(line.encode())))
    if torn and not repair:
        raise CorruptRecordsError(f"{path}: last line is truncated")
    if order and rows_per_iteration and len(groups[order[-1]]) != rows_per_iteration:
        if not repair:
            raise CorruptRecordsError(f"{path}: last iteration is incomplete")
        del groups[order.pop()]
    if len(set(order)) != len(order):
        raise CorruptRecordsError(f"{path}: repeated iteration")
    if repair:
        keep_bytes += sum(size for it in order for *_, size in groups[it])
        if keep_bytes != len(raw):
            log.warning("%s: discarding %d bytes of unfinished output", path, len(raw) - keep_bytes)
            with open(path, "r+b") as fh:
                fh.truncate(keep_bytes)
    return {it: [(o, v) for o, v, _ in groups[it]] for it in order}


# ---------------------------------------------------------------------------
# summaries

SUMMARY_COLUMNS = (
    "scenario", "setup", "correlation", "coefficients", "r2", "opv", "n", "method", "n_iter",
    "coverage", "power", "type1", "n_intervals", "n_nonzero", "n_zero", "true_model_freq",
    "fp_freq",
    "median_width", "iqr_width", "unstable_rate", "infinite_rate", "unstable_iter_rate",
    "infinite_iter_rate", "mean_val_r2",
    "rate_no_selection", "rate_rank_deficient", "rate_non_converged",
    "rate_degenerate_interval", "rate_inconsistency",
)
CONDITIONAL_COLUMNS = (
    "scenario", "method", "variable", "is_true_predictor", "selection_freq", "coverage",
    "power", "type1", "n_intervals", "n_nonzero", "n_zero",
)


@dataclass(eq=False)
class ScenarioSummary:
    scenario_id: str
    rows: list
    conditional: list
    runtime: dict = field(default_factory=dict)

    def row(self, method):
        for r in self.rows:
            if r["method"] == method:
                return r
        raise KeyError(method)


def summarize(scenario, methods, iterations, options: HarnessOptions | None = None):
    """Per-method aggregates from {iteration: [(outcome, val_r2), ...]}."""
    options = options or HarnessOptions()
    zero_tol = options.zero_tol_for(scenario.setup)
    support = set(int(j) for j in scenario.coefficients.support)
    p, n_iter = scenario.p, len(iterations)
    rows, cond_rows = [], []
    for spec in methods:
        outs, vals, failures = [], [], []
        unstable_its = infinite_its = 0
        for it in sorted(iterations):
            mine = [(o, v) for o, v in iterations[it] if o.method == spec.id]
            if not mine:
                continue
            outs += [o for o, _ in mine]
            # an iteration counts as unstable if any of its intervals is
            unstable_its += any(o.available and o.unstable for o, _ in mine)
            infinite_its += any(o.available and o.flag_infinite for o, _ in mine)
            if mine[0][1] is not None:
                vals.append(mine[0][1])
            failures.append(mine[0][0].failure_code)
        general = aggregate_general(outs, zero_tol)
        sel = selection_metrics(outs, support, p)
        widths = width_summary(outs)
        row = dict(
            scenario=scenario.id, setup=scenario.setup, correlation=scenario.correlation.name,
            coefficients=scenario.coefficients.name, r2=scenario.target_r2,
            opv=scenario.obs_per_variable, n=scenario.n, method=spec.id, n_iter=n_iter,
            coverage=general.coverage, power=general.power, type1=general.type1,
            n_intervals=general.n_intervals, n_nonzero=general.n_nonzero,
            n_zero=general.n_zero, true_model_freq=sel.true_model_freq,
            fp_freq=sel.any_false_positive_freq, median_width=widths.median_width,
            iqr_width=widths.iqr_width, unstable_rate=widths.unstable_rate,
            infinite_rate=widths.infinite_rate,
            unstable_iter_rate=unstable_its / len(failures) if failures else None,
            infinite_iter_rate=infinite_its / len(failures) if failures else None,
            mean_val_r2=float(np.mean(vals)) if vals else None,
        )
        for code in FAILURE_CODES:
            row["rate_" + code.replace("-", "_")] = (
                sum(f == code for f in failures) / len(failures) if failures else None)
        rows.append(row)
        for j in range(p):
            c = aggregate_conditional(outs, j, zero_tol, n_iter=n_iter)
            cond_rows.append(dict(
                scenario=scenario.id, method=spec.id, variable=j + 1,
                is_true_predictor=j in support, selection_freq=c.selection_freq,
                coverage=c.coverage, power=c.power, type1=c.type1, n_intervals=c.n_intervals,
                n_nonzero=c.n_nonzero, n_zero=c.n_zero,
            ))
    return ScenarioSummary(scenario.id, rows, cond_rows)


def _summary_fmt(v):
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def write_table(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_summary_fmt(r[c]) for c in columns])


def read_table(path, required=()):
    """Read a tidy table written by :func:`write_table` (``null`` -> None)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigurationError(f"{path}: missing columns {missing}")
        return [{k: (None if v == "null" else v) for k, v in row.items()} for row in reader]


# ---------------------------------------------------------------------------
# scenario runner

def default_workers():
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {env!r}")
    return 1


def _safe_name(scenario_id):
    return scenario_id.replace("/", "__").replace("=", "")


def _iteration_task(args):
    scenario, method_ids, seed, iteration, options = args
    return run_iteration(scenario, method_ids, seed, iteration, options)


def _run_iterations(scenario, methods, todo, master_seed, workers, options):
    ids = [m.id for m in methods]
    tasks = [(scenario, ids, master_seed, it, options) for it in todo]
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield _iteration_task(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order, so the writer sees iterations in order
        yield from pool.map(_iteration_task, tasks, chunksize=max(1, len(tasks) // (4 * workers)))


def run_scenario(scenario, methods=None, n_iter=900, master_seed=0, workers=None,
                 out_dir=None, options: HarnessOptions | None = None) -> ScenarioSummary:
    """Run ``n_iter`` iterations and aggregate them.

    With ``out_dir`` the per-variable records are appended to
    ``out_dir/records/<scenario>.csv`` as they complete, and a rerun skips
    iterations already on disk.
    """
    if n_iter < 1:
        raise ConfigurationError("n_iter must be >= 1")
    options = options or HarnessOptions()
    methods = resolve_methods([m.id if isinstance(m, MethodSpec) else m for m in (methods or METHOD_IDS)])
    workers = default_workers() if workers is None else workers
    rows_per_it = len(methods) * scenario.p
    done: dict[int, list] = {}
    runtime = {m.id: 0.0 for m in methods}
    fh = None
    if out_dir is not None:
        rec_dir = Path(out_dir) / "records"
        rec_dir.mkdir(parents=True, exist_ok=True)
        path = rec_dir / (_safe_name(scenario.id) + ".csv")
        meta_path = path.with_suffix(".meta.json")
        meta = dict(scenario=scenario.id, methods=[m.id for m in methods],
                    master_seed=int(master_seed), options=asdict(options))
        if path.exists():
            if not meta_path.exists() or json.loads(meta_path.read_text()) != meta:
                raise CorruptRecordsError(
                    f"{path}: existing records were produced with a different configuration")
            done = read_records(path, rows_per_it, repair=True)
            done = {it: rows for it, rows in done.items() if it < n_iter}
        else:
            meta_path.write_text(json.dumps(meta, indent=1, sort_keys=True))
            path.write_text(_row_text(RECORD_COLUMNS) + "\n")
        fh = open(path, "a")
    try:
        todo = [it for it in range(n_iter) if it not in done]
        for record in _run_iterations(scenario, methods, todo, master_seed, workers, options):
            rows = []
            for res in record.results.values():
                rows += [(o, res.val_r2) for o in res.outcomes]
                runtime[res.method] += res.seconds
            done[record.iteration] = rows
            if fh is not None:
                fh.writelines(_record_lines(record))
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    summary = summarize(scenario, methods, done, options)
    summary.runtime = runtime
    return summary


def run_grid(scenarios, methods=None, n_iter=900, master_seed=0, workers=None, out_dir=None,
             options: HarnessOptions | None = None, progress=None):
    """Run scenarios in order; writes summary.csv, conditional.csv and timing.csv."""
    summaries = []
    for k, scenario in enumerate(scenarios):
        s = run_scenario(scenario, methods, n_iter, master_seed, workers, out_dir, options)
        summaries.append(s)
        if progress is not None:
            progress(k + 1, len(scenarios), s)
    if out_dir is not None:
        out = Path(out_dir)
        write_table(out / "summary.csv", SUMMARY_COLUMNS, [r for s in summaries for r in s.rows])
        write_table(out / "conditional.csv", CONDITIONAL_COLUMNS,
                    [r for s in summaries for r in s.conditional])
        timing = [dict(scenario=s.scenario_id, method=m, seconds=t)
                  for s in summaries for m, t in s.runtime.items()]
        write_table(out / "timing.csv", ("scenario", "method", "seconds"), timing)
    return summaries


# ---------------------------------------------------------------------------
# bootstrap

def bootstrap_selection_frequencies(x, y, selector, n_boot=100, rng=None):
    """Per-variable inclusion fractions over ``n_boot`` row resamples.

    Each resample is re-standardized before selection.  A resample whose
    selection fails counts as an empty model.
    """
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    rng = np.random.default_rng(rng)
    counts = np.zeros(p)
    for b in range(n_boot):
        idx = rng.integers(0, n, n)
        xb, _, scale = datagen.standardize(x[idx])
        try:
            if np.any(scale <= 0):
                raise RankDeficientError(np.flatnonzero(scale <= 0), "constant column in resample")
            model = selector(xb, y[idx], rng).model
        except (SelectiveLassoError, np.linalg.LinAlgError) as exc:
            log.info("bootstrap resample %d: selection failed (%s); counted as empty", b, exc)
            continue
        counts[list(model)] += 1
    return counts / n_boot

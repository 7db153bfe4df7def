"""Command-line entry point: ``simulate``, ``report`` and ``analyze``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .errors import ConfigurationError, SelectiveLassoError
from .harness import (
    CONDITIONAL_COLUMNS,
    METHOD_IDS,
    SUMMARY_COLUMNS,
    WORKERS_ENV,
    HarnessOptions,
    default_workers,
    enumerate_scenarios,
    load_config,
    read_table,
    resolve_methods,
    run_grid,
    write_table,
)

log = logging.getLogger("selective_lasso")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

# kind -> (source table, columns kept, optional renames)
REPORT_KINDS = {
    "coverage": ("summary", ("scenario", "setup", "r2", "opv", "method", "coverage", "n_intervals"), {}),
    "power": ("summary", ("scenario", "setup", "r2", "opv", "method", "power", "type1",
                        "n_nonzero", "n_zero"), {}),
    "model-selection": ("summary", ("scenario", "setup", "r2", "opv", "method",
                                    "true_model_freq", "fp_freq"), {}),
    "width": ("summary", ("scenario", "setup", "r2", "opv", "method", "median_width",
                          "iqr_width"), {}),
    "stability": ("summary", ("scenario", "setup", "method", "unstable_iter_rate",
                              "infinite_iter_rate", "unstable_rate", "infinite_rate",
                              "rate_degenerate_interval"), {}),
    "r2": ("summary", ("scenario", "setup", "r2", "opv", "method", "mean_val_r2"), {}),
    "freq-vs-coverage": ("conditional", ("variable", "scenario", "method", "selection_freq",
                                         "coverage", "is_true_predictor"),
                         {"coverage": "conditional_coverage"}),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog="selective-lasso", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run a scenario grid")
    src = sim.add_mutually_exclusive_group()
    src.add_argument("--grid", help="built-in grid: toy-full or realistic-full")
    src.add_argument("--config", help="YAML or JSON grid/run configuration")
    sim.add_argument("--methods", help=f"comma-separated subset of {','.join(METHOD_IDS)}")
    sim.add_argument("--alpha", type=float)
    sim.add_argument("--iterations", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", default="results")
    sim.add_argument("--workers", type=int, help=f"process count (default: ${WORKERS_ENV} or 1)")
    sim.add_argument("--max-scenarios", type=int, help="run only the first N scenarios")

    rep = sub.add_parser("report", help="tidy plot data from simulation output")
    rep.add_argument("inputs", nargs="+", help="output directories or summary/conditional files")
    rep.add_argument("--kind", required=True, choices=sorted(REPORT_KINDS))
    rep.add_argument("--out", help="output file (default: stdout)")

    ana = sub.add_parser("analyze", help="run the methods on a dataset")
    ana.add_argument("dataset", help="delimited text file with header, or 'bodyfat'")
    ana.add_argument("--outcome", help="outcome column (bodyfat: siri)")
    ana.add_argument("--methods", default="Full,Lasso-CV-SI,Lasso-CV-PoSI")
    ana.add_argument("--alpha", type=float, default=0.1)
    ana.add_argument("--n-boot", type=int, default=100)
    ana.add_argument("--seed", type=int, default=0)
    ana.add_argument("--out", help="also write the table as CSV here")
    return parser


def _resolve_run_config(args):
    cfg = load_config(args.config) if args.config else {}
    if args.grid:
        cfg["grid"] = args.grid
    if "grid" not in cfg and "grids" not in cfg and "setup" not in cfg:
        raise ConfigurationError("give --grid or --config")
    run = dict(
        methods=args.methods or cfg.get("methods") or list(METHOD_IDS),
        alpha=args.alpha if args.alpha is not None else cfg.get("alpha", 0.1),
        iterations=args.iterations if args.iterations is not None else cfg.get("iterations", 900),
        seed=args.seed if args.seed is not None else cfg.get("seed", 0),
        workers=args.workers if args.workers is not None else default_workers(),
    )
    if not 0 < float(run["alpha"]) < 1:
        raise ConfigurationError("alpha must be in (0, 1)")
    if int(run["iterations"]) < 1:
        raise ConfigurationError("iterations must be >= 1")
    grid = {k: v for k, v in cfg.items() if k not in ("methods", "alpha", "iterations", "seed",
                                                      "workers", "target", "known_sigma")}
    run["methods"] = [m.id for m in resolve_methods(run["methods"])]
    run["target"] = cfg.get("target", "population")
    run["known_sigma"] = bool(cfg.get("known_sigma", False))
    return grid, run


def cmd_simulate(args):
    grid, run = _resolve_run_config(args)
    scenarios = enumerate_scenarios(grid)
    if args.max_scenarios:
        scenarios = scenarios[: args.max_scenarios]
    options = HarnessOptions(alpha=float(run["alpha"]), target=run["target"],
                             known_sigma=run["known_sigma"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = dict(grid=grid, run=run, options=asdict(options),
                    scenarios=[s.id for s in scenarios], version=__version__)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")

    def progress(k, total, summary):
        fails = {r["method"]: r["rate_rank_deficient"] for r in summary.rows
                 if r["rate_rank_deficient"]}
        log.info("[%d/%d] %s%s", k, total, summary.scenario_id,
                 f"  rank-deficient rates {fails}" if fails else "")

    run_grid(scenarios, run["methods"], int(run["iterations"]), int(run["seed"]),
             int(run["workers"]), out, options, progress)
    log.info("wrote %s", out / "summary.csv")
    return EXIT_OK


def _locate(inputs, table):
    name = f"{table}.csv"
    found = []
    for item in inputs:
        p = Path(item)
        if not p.exists():
            raise FileNotFoundError(f"{p} not found")
        if p.is_dir():
            p = p / name
        elif p.name != name:
            continue
        if not p.exists():
            raise FileNotFoundError(f"{p} not found")
        found.append(p)
    if not found:
        raise ConfigurationError(f"no {name} among the inputs")
    return found


def cmd_report(args):
    table, columns, renames = REPORT_KINDS[args.kind]
    rows = []
    for path in _locate(args.inputs, table):
        source_cols = SUMMARY_COLUMNS if table == "summary" else CONDITIONAL_COLUMNS
        rows += read_table(path, required=[c for c in columns if c in source_cols])
    out_cols = tuple(renames.get(c, c) for c in columns)
    tidy = [{renames.get(c, c): r[c] for c in columns} for r in rows]
    if args.out:
        write_table(args.out, out_cols, tidy)
    else:
        import csv
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(out_cols)
        for r in tidy:
            w.writerow(["null" if r[c] is None else r[c] for c in out_cols])
    return EXIT_OK


def cmd_analyze(args):
    from .analysis import analyze_dataset, format_report
    from .datasets import load_bodyfat, read_table as read_data

    if args.dataset == "bodyfat":
        data = load_bodyfat()
    else:
        if not args.outcome:
            raise ConfigurationError("--outcome is required for a dataset file")
        try:
            data = read_data(args.dataset, args.outcome)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
    rows = analyze_dataset(data.x, data.y, data.names, args.methods, args.alpha,
                           args.n_boot, args.seed)
    print(format_report(rows, args.alpha))
    if args.out:
        cols = ("method", "variable", "selected", "estimate", "lower", "upper", "estimate_std",
                "lower_std", "upper_std", "p_value", "flag_infinite", "flag_excludes_estimate",
                "boot_freq")
        write_table(args.out, cols, [asdict(r) for r in rows])
        manifest = dict(dataset=args.dataset, outcome=data.outcome, n=len(data.y),
                        predictors=list(data.names), methods=args.methods, alpha=args.alpha,
                        n_boot=args.n_boot, seed=args.seed, version=__version__)
        Path(str(args.out) + ".manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "report": cmd_report, "analyze": cmd_analyze}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SelectiveLassoError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

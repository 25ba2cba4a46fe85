"""Command-line entry point: ``simplexconf <command> ...``.

Exit codes: 0 success, 2 parse or configuration error, 3 fit failure,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .application import RunConfig, predict_regions, run_application
from .conformal import split_data
from .data import (
    BUDGET_ITALY_SCHEMA,
    budget_italy_path,
    load_dataset,
    load_model,
    load_schema,
    save_model,
)
from .exceptions import (
    BracketError,
    ConvergenceError,
    DomainError,
    FitError,
    ParseError,
    SchemaError,
    UnsupportedDimensionError,
)
from .regression import fit_mle
from .reporting import read_region, write_regions, write_summaries
from .simulation import (
    HDR_FLOOR,
    HDR_GRID,
    METHODS,
    QR,
    SCENARIOS,
    SIMPLEX_GRID,
    compare_hdr_vs_full,
    run_monte_carlo,
    scenario,
)

log = logging.getLogger("simplexconf")

EXIT_OK, EXIT_CONFIG, EXIT_FIT, EXIT_NUMERIC = 0, 2, 3, 4

# short command-line names for the methods
METHOD_NAMES = {
    "qr": QR,
    "hdr-floor": HDR_FLOOR,
    "hdr-grid": HDR_GRID,
    "simplex-grid": SIMPLEX_GRID,
}


def _method(name):
    key = name.strip()
    if key in METHOD_NAMES:
        return METHOD_NAMES[key]
    if key in METHODS:
        return key
    raise argparse.ArgumentTypeError(
        f"unknown method {name!r}; choose from {', '.join(METHOD_NAMES)}")


def _method_list(text):
    return tuple(_method(t) for t in text.split(",") if t.strip())


def _alpha(text):
    a = float(text)
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return a


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _schema(path):
    return BUDGET_ITALY_SCHEMA if path is None else load_schema(path)


def cmd_fit(args):
    schema = _schema(args.schema)
    data = load_dataset(args.data, schema)
    model = fit_mle(data)
    c = model.convergence
    log.info("fit: %d iterations, nll %.6f, grad norm %.2e", c.iterations, c.nll, c.grad_norm)
    save_model(model, args.out, schema)


def cmd_predict(args):
    model, schema = load_model(args.model)
    schema = load_schema(args.schema) if args.schema else (schema or BUDGET_ITALY_SCHEMA)
    data = load_dataset(args.data, schema)
    if args.calibration:
        cal, test = load_dataset(args.calibration, schema), data
    else:
        split = split_data(len(data), (0.0, args.cal_fraction, 1.0 - args.cal_fraction),
                           seed=args.seed)
        cal, test = data.subset(split.calibration), data.subset(split.test)
    if len(cal) == 0 or len(test) == 0:
        raise DomainError("calibration and test sets must both be non-empty")
    records = predict_regions(model, cal, test, args.method, args.alpha, args.grid_m)
    write_regions(records, args.out)
    covered = np.mean([r.covered for r in records])
    log.info("predict: %d regions, empirical coverage %.2f%%", len(records), 100 * covered)


def cmd_simulate(args):
    spec = scenario(args.scenario, D=args.dims)
    summaries = run_monte_carlo(spec, args.methods, args.iters, args.alpha, args.seed,
                                args.grid_m, args.full_grid_m, oracle=args.oracle,
                                workers=args.workers)
    write_summaries(summaries, args.out, timing=args.timing)


def cmd_compare_grid(args):
    spec = scenario(args.scenario, D=args.dims)
    summaries = compare_hdr_vs_full(spec, args.iters, args.alpha, args.m_hdr, args.m_full,
                                    args.seed, args.workers)
    write_summaries(summaries, args.out, timing=True)


def cmd_apply(args):
    data = load_dataset(args.data or budget_italy_path(), _schema(args.schema))
    config = RunConfig(alpha=args.alpha, repeats=args.repeats, seed=args.seed,
                       methods=args.methods, grid_m=args.grid_m)
    summaries = run_application(data, config, label=args.label)
    write_summaries(summaries, args.out, timing=args.timing)


def cmd_plot(args):
    from .plotting import emit_ternary_plot

    region, mean, truth = read_region(args.region, args.row)
    if truth is None:
        raise ParseError(f"{args.region}: row {args.row} has no observed response to draw")
    emit_ternary_plot(region, mean, truth, args.out, title=args.title)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simplexconf",
        description="Conformal prediction regions for Dirichlet regression.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit", parents=[common],
                       help="fit a Dirichlet regression by maximum likelihood")
    s.add_argument("--data", required=True)
    s.add_argument("--schema", help="JSON schema (default: BudgetItaly layout)")
    s.add_argument("--out", required=True, help="model JSON to write")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("predict", parents=[common],
                       help="calibrate a fitted model and emit one region per row")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True, help="rows to predict")
    s.add_argument("--calibration",
                   help="calibration rows; if omitted, --data is split into calibration and test")
    s.add_argument("--cal-fraction", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--schema", help="override the schema stored with the model")
    s.add_argument("--method", type=_method, default=QR)
    s.add_argument("--alpha", type=_alpha, default=0.1)
    s.add_argument("--grid-m", type=_positive_int)
    s.add_argument("--out", required=True, help="region CSV to write")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("simulate", parents=[common],
                       help="Monte Carlo coverage study on a named scenario")
    s.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    s.add_argument("--dims", type=int, choices=(3, 4), default=3)
    s.add_argument("--iters", type=_positive_int, default=1000)
    s.add_argument("--alpha", type=_alpha, default=0.1)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--methods", type=_method_list, default=(QR, HDR_FLOOR, HDR_GRID),
                   help="comma-separated, e.g. qr,hdr-floor,hdr-grid")
    s.add_argument("--grid-m", type=_positive_int)
    s.add_argument("--full-grid-m", type=_positive_int)
    s.add_argument("--oracle", action="store_true", help="use the true parameters, no fit")
    s.add_argument("--timing", action="store_true",
                   help="record wall-clock times (makes output non-reproducible)")
    s.add_argument("--workers", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("compare-grid", parents=[common],
                       help="floor-restricted grid against a full simplex grid")
    s.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    s.add_argument("--dims", type=int, choices=(3, 4), default=3)
    s.add_argument("--m-hdr", type=_positive_int)
    s.add_argument("--m-full", type=_positive_int)
    s.add_argument("--iters", type=_positive_int, default=100)
    s.add_argument("--alpha", type=_alpha, default=0.1)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--workers", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_compare_grid)

    s = sub.add_parser("apply", parents=[common],
                       help="repeated-split evaluation on a real data set")
    s.add_argument("--data", help="CSV file (default: bundled BudgetItaly)")
    s.add_argument("--schema", help="JSON schema (default: BudgetItaly layout)")
    s.add_argument("--repeats", type=_positive_int, default=10)
    s.add_argument("--alpha", type=_alpha, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--methods", type=_method_list, default=(QR, HDR_FLOOR, HDR_GRID))
    s.add_argument("--grid-m", type=_positive_int)
    s.add_argument("--label", default="application")
    s.add_argument("--timing", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_apply)

    s = sub.add_parser("plot", parents=[common],
                       help="ternary diagram of one region from a region CSV")
    s.add_argument("--region", required=True)
    s.add_argument("--row", type=int, default=0)
    s.add_argument("--title")
    s.add_argument("--out", required=True, help="output file, e.g. region.svg")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        args.func(args)
    except FitError as exc:
        print(f"simplexconf: fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (BracketError, ConvergenceError, OverflowError, FloatingPointError) as exc:
        print(f"simplexconf: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParseError, SchemaError, DomainError, UnsupportedDimensionError, OSError) as exc:
        print(f"simplexconf: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

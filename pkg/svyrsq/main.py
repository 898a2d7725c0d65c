import argparse
import json
import logging
import math
import os
import sys
from typing import Dict, List, Optional

from pydantic import ValidationError

from svyrsq.glm import SolverOptions, DEFAULT_OPTIONS, fit
from svyrsq.harness import (
    EXPERIMENT_REGISTRY, ExperimentConfig, TwoPhaseConfig, MAIN_EFFECTS, DEFAULT_CONTROL_WEIGHT,
    load_esoph, replicate_table2, replicate_two_phase, format_value,
)
from svyrsq.rsq import rsq_summary
from svyrsq.sampling import DEFAULT_SEED
from svyrsq.utils import (
    Family, FitResult, RsqSummary, SvyRsqError, PreconditionError, SchemaError, FitError,
    FamilyNotSupportedError, DataNotFoundError,
)
from svyrsq.utils.tabular import CsvSchema, read_frame

logger = logging.getLogger("svyrsq")

SEED_ENV = "SVYRSQ_SEED"
BUNDLED_PREFIX = "bundled:"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FIT = 3

FAMILIES = {"logistic": Family.logistic, "gaussian": Family.gaussian_mle}


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got `{text}`")


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got `{text}`")


def _spline(text: str):
    column, sep, knots = text.partition("=")
    if not sep or not column.strip():
        raise argparse.ArgumentTypeError(f"expected column=k1,k2,..., got `{text}`")
    return column.strip(), _floats(knots)


def default_seed() -> int:
    value = os.environ.get(SEED_ENV)
    if value is None:
        return DEFAULT_SEED
    try:
        return int(value)
    except ValueError:
        raise SchemaError(f"{SEED_ENV} must be an integer, got `{value}`.")


# ---- fit ----

def _load_frame(source: str):
    if source.startswith(BUNDLED_PREFIX):
        name = source[len(BUNDLED_PREFIX):]
        if name != "esoph":
            raise DataNotFoundError(f"No bundled dataset named `{name}`; available: esoph.")
        return load_esoph(DEFAULT_CONTROL_WEIGHT), MAIN_EFFECTS
    return read_frame(source), None


def _schema(args, frame, default_formula: Optional[str]) -> CsvSchema:
    splines: Dict[str, List[float]] = dict(args.spline or [])
    formula = args.formula or (None if args.response else default_formula)
    if formula:
        schema = CsvSchema.from_formula(formula, args.weights)
        return schema.model_copy(update={"splines": splines})
    return CsvSchema.from_frame(frame, args.response or "y", args.weights, splines)


def fit_report(fit_result: FitResult, summary: Optional[RsqSummary], formula: str) -> Dict:
    return {
        "formula": formula,
        "family": fit_result.family.value,
        "n": fit_result.n,
        "weight_sum": fit_result.weight_sum,
        "converged": fit_result.converged,
        "iterations": fit_result.iterations,
        "coef": {name: float(v) for name, v in zip(fit_result.names, fit_result.coef)},
        "loglik": fit_result.loglik,
        "null_loglik": fit_result.null_loglik,
        "statistics": None if summary is None else {
            "cox_snell": summary.cox_snell,
            "nagelkerke": summary.nagelkerke,
            "design_cox_snell": summary.design_cox_snell,
            "design_nagelkerke": summary.design_nagelkerke,
            "loglik_ratio": summary.loglik_ratio,
        },
    }


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _text_report(report: Dict, fit_result: FitResult) -> str:
    lines = [f"formula: {report['formula']}", str(fit_result),
             f"n = {report['n']}, sum of weights = {format_value(report['weight_sum'])}",
             f"loglik      = {format_value(report['loglik'])}",
             f"null loglik = {format_value(report['null_loglik'])}"]
    if report["statistics"]:
        width = max(len(k) for k in report["statistics"])
        lines += [f"{k.ljust(width)}  {format_value(v)}" for k, v in report["statistics"].items()]
    return "\n".join(lines) + "\n"


def cmd_fit(args) -> int:
    frame, default_formula = _load_frame(args.csv)
    schema = _schema(args, frame, default_formula)
    data = schema.build(frame)
    family = FAMILIES[args.family]
    data.check_family(family)

    opts = SolverOptions(tol=args.tol, max_iter=args.max_iter)
    result = fit(data, family, opts)
    summary = rsq_summary(result) if result.converged else None
    report = fit_report(result, summary, str(schema.to_formula()))
    _emit(json.dumps(_json_safe(report), indent=2) + "\n" if args.json else _text_report(report, result), args.out)
    if not result.converged:
        print(f"warning: fit did not converge after {result.iterations} iterations; "
              "pseudo-R2 not reported.", file=sys.stderr)
        return EXIT_FIT
    return EXIT_OK


# ---- simulate / replicate ----

def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    overrides = {"replicates": args.replicates, "base_seed": args.seed, "progress": args.progress}
    if args.coef is not None:
        overrides["gen_coef"] = args.coef
    if args.design == "cc":
        if args.pop_size is not None:
            overrides["pop_size"] = args.pop_size
        if args.ratios is not None:
            overrides["ratios"] = args.ratios
        table = replicate_table2(ExperimentConfig(single_draw=args.single_draw, model=args.formula,
                                                  **{k: v for k, v in overrides.items() if v is not None}))
    else:
        if args.pop_size is not None:
            overrides["cohort_size"] = args.pop_size
        if args.single_draw:
            overrides["replicates"] = 1
        table = replicate_two_phase(TwoPhaseConfig(**{k: v for k, v in overrides.items() if v is not None}))
    _emit(table.to_json() if args.json else table.to_tsv(), args.out)
    return EXIT_OK


def cmd_replicate(args) -> int:
    entry = EXPERIMENT_REGISTRY[args.target]
    if args.target == "esoph":
        report = entry["function"](control_weight=args.control_weight, corrected=args.corrected)
    elif args.target == "two-phase":
        report = entry["function"](TwoPhaseConfig(base_seed=args.seed, replicates=args.replicates or 200,
                                                  progress=args.progress))
    else:
        report = entry["function"](ExperimentConfig(base_seed=args.seed, replicates=args.replicates or 200,
                                                    progress=args.progress))
    if args.json:
        _emit(report.to_json(), args.out)
        return EXIT_OK
    text = report.to_text()
    if entry["published"]:
        text += "\nPublished values:\n" + report.compare(entry["published"])
    _emit(text, args.out)
    return EXIT_OK


def build_parser(seed: int = DEFAULT_SEED) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svyrsq", description="Design-based pseudo-R2 for survey and case-control data.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for solver detail")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="Fit a model to a CSV file and report pseudo-R2 statistics")
    p.add_argument("csv", help=f"CSV path, or {BUNDLED_PREFIX}esoph for the bundled grouped data")
    p.add_argument("--formula", help="e.g. 'y ~ x1 + C(x2) + spline(x3; 50,65) + x4:x5'")
    p.add_argument("--response", help="Response column when no formula is given (default y)")
    p.add_argument("--weights", help="Sampling-weight column")
    p.add_argument("--family", choices=sorted(FAMILIES), default="logistic")
    p.add_argument("--spline", type=_spline, action="append", help="column=k1,k2 linear spline knots")
    p.add_argument("--tol", type=float, default=DEFAULT_OPTIONS.tol)
    p.add_argument("--max-iter", type=int, default=DEFAULT_OPTIONS.max_iter)
    p.add_argument("--json", action="store_true", help="Machine-readable output")
    p.add_argument("--out", help="Write the report here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="Monte-Carlo comparison of naive and design-based pseudo-R2")
    p.add_argument("--design", choices=["cc", "two-phase"], default="cc")
    p.add_argument("--pop-size", type=int)
    p.add_argument("--coef", type=_floats, help="Generating coefficients, e.g. --coef=-6,1")
    p.add_argument("--ratios", type=_ints, help="Controls per case, e.g. 1,2,5,10,20")
    p.add_argument("--replicates", type=int)
    p.add_argument("--single-draw", action="store_true", help="One sample per design")
    p.add_argument("--formula", help="Working model fitted to each sample")
    p.add_argument("--seed", type=int, default=seed, help=f"Base seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--progress", action="store_true")
    p.add_argument("--json", action="store_true", help="JSON records instead of TSV")
    p.add_argument("--out", help="Write the table here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replicate", help="Re-run a published analysis and compare")
    p.add_argument("target", choices=list(EXPERIMENT_REGISTRY))
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--replicates", type=int)
    p.add_argument("--control-weight", type=float, default=DEFAULT_CONTROL_WEIGHT, help="esoph only")
    p.add_argument("--corrected", action="store_true", help="esoph only: corrected control counts")
    p.add_argument("--progress", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_replicate)
    return parser


def _configure_logging(verbosity: int):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        parser = build_parser(default_seed())
        args = parser.parse_args(argv)
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    _configure_logging(args.verbose)

    try:
        return args.func(args)
    except (PreconditionError, FamilyNotSupportedError, DataNotFoundError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FitError as e:
        print(f"fit failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FIT
    except SvyRsqError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())

import argparse
import asyncio
import json
import logging
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from hessbb.config import analysis_config
from hessbb.core.expr import to_numpy
from hessbb.errors import HessbbError, UnsupportedDimensionError, VerificationError
from hessbb.models import AbsMode, HessianRoute, SimplifyLevel
from hessbb.enclosure.range_forms import RangeForm
from hessbb.problems.loader import Problem, load_problem
from hessbb.workflows.analysis_workflow import analyze
from hessbb.workflows.compare_workflow import format_table, run_compare

logger = logging.getLogger("hessbb")

EXIT_OK, EXIT_INPUT, EXIT_VERIFICATION = 0, 1, 2


def _choices(enum) -> List[str]:
    return [member.value for member in enum]


def _csv_list(enum):
    def convert(text: str):
        values = [v.strip() for v in text.split(",") if v.strip()]
        try:
            return [enum(v) for v in values]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a comma-separated subset of {_choices(enum)}") from None
    return convert


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hessbb", description="Convex underestimators of alphaBB type over boxes")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, single_mode: bool = True):
        p.add_argument("problem", help="problem file")
        if single_mode:
            p.add_argument("--route", choices=_choices(HessianRoute))
            p.add_argument("--abs", dest="abs_mode", choices=_choices(AbsMode))
            p.add_argument("--form", choices=_choices(RangeForm),
                           help="natural, mvf (derivative mean-value form), slope, mono or best;"
                                " on the quadratic-sum example only slope and best reach alpha = (21, 24)")
            p.add_argument("--simplify", choices=_choices(SimplifyLevel))
            p.add_argument("--no-simplify", dest="simplify", action="store_const", const=SimplifyLevel.OFF.value)
        p.add_argument("--d", help="'width' (default) or comma-separated scaling weights")
        p.add_argument("--rigorous", action="store_true", default=None, help="outward rounding and a certified bound")
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--convexity-samples", type=int)
        p.add_argument("--sampler", choices=["halton", "sobol"])
        p.add_argument("--max-iter", type=int)
        p.add_argument("-v", "--verbose", action="count", default=0)

    common(sub.add_parser("analyze", help="analyze one configuration, JSON report on stdout"))

    compare = sub.add_parser("compare", help="run the configuration matrix")
    common(compare, single_mode=False)
    compare.add_argument("--routes", type=_csv_list(HessianRoute), default=list(HessianRoute))
    compare.add_argument("--abs-modes", type=_csv_list(AbsMode), default=list(AbsMode))
    compare.add_argument("--forms", type=_csv_list(RangeForm), default=list(RangeForm))
    compare.add_argument("--simplify-levels", type=_csv_list(SimplifyLevel), default=list(SimplifyLevel))
    compare.add_argument("--workers", type=int)

    plot = sub.add_parser("plot", help="write f and g on a grid as CSV")
    common(plot)
    plot.add_argument("--grid", type=int, default=101)
    plot.add_argument("--out", required=True)
    return parser


def setup_logging(verbose: int):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, analysis_config.get("log_level").upper(), logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(message)s")


def resolve_settings(args: argparse.Namespace, problem: Problem):
    """CLI flag > problem file > environment > default"""
    overrides: Dict[str, Any] = dict(problem.settings.overrides())
    if args.d is not None:
        if args.d.strip() == "width":
            overrides.pop("d", None)
        else:
            try:
                overrides["d"] = tuple(float(v) for v in args.d.split(","))
            except ValueError:
                raise HessbbError(f"--d expects 'width' or numbers, got {args.d!r}") from None
    for key in ("route", "abs_mode", "form", "simplify", "rigorous", "seed", "samples",
                "convexity_samples", "sampler", "max_iter"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return analysis_config.settings(overrides)


def cmd_analyze(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    settings = resolve_settings(args, problem)
    try:
        report = analyze(problem.objective, problem.box, settings=settings, var_names=problem.settings.var_names)
    except VerificationError as e:
        logger.error("❌ %s", e)
        print(json.dumps(e.report.to_json_dict(), indent=2))
        return EXIT_VERIFICATION
    print(json.dumps(report.to_json_dict(), indent=2))
    if not report.verified_convexity:
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    base = resolve_settings(args, problem)
    workers = args.workers if args.workers is not None else analysis_config.get("workers")
    rows = asyncio.run(run_compare(
        problem.objective, problem.box, base,
        routes=args.routes, abs_modes=args.abs_modes, forms=args.forms, simplify_levels=args.simplify_levels,
        workers=workers, var_names=problem.settings.var_names,
    ))
    print(format_table(rows), file=sys.stderr)
    print(json.dumps(rows, indent=2))
    return EXIT_OK


def plot_grid(problem: Problem, g, grid: int) -> np.ndarray:
    """Rows (x..., f, g) over a uniform grid, first variable outermost."""
    axes = [np.linspace(iv.lo, iv.hi, grid) for iv in problem.box]
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([m.ravel() for m in mesh])
    F = to_numpy(problem.objective)(X)
    G = to_numpy(g)(X)
    return np.column_stack([X.T, F, G])


def cmd_plot(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    if problem.box.dim not in (1, 2):
        raise UnsupportedDimensionError(f"plot needs 1 or 2 variables, the problem has {problem.box.dim}")
    if args.grid < 2:
        raise HessbbError("--grid must be at least 2")
    settings = resolve_settings(args, problem)
    try:
        report = analyze(problem.objective, problem.box, settings=settings, var_names=problem.settings.var_names)
    except VerificationError as e:
        logger.warning("⚠️ %s; plotting anyway", e)
        report = e.report
    data = plot_grid(problem, report.underestimator, args.grid)
    header = ",".join([f"x{i + 1}" for i in range(problem.box.dim)] + ["f", "g"])
    np.savetxt(args.out, data, delimiter=",", header=header, comments="", fmt="%.17g")
    logger.info("✅ wrote %d rows to %s", data.shape[0], args.out)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "compare": cmd_compare, "plot": cmd_plot}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except HessbbError as e:
        logger.error("❌ %s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

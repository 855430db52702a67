"""Convex underestimators of alphaBB type from symbolic, simplified Hessians."""

from .core.expr import Expr, eval_point, to_numpy
from .core.interval import Box, Interval, IntervalMatrix, outward_rounding
from .core.parser import format_expr, parse
from .enclosure.range_forms import RangeForm
from .errors import HessbbError
from .models import AbsMode, AnalysisSettings, HessianRoute, ScalingVector, SimplifyLevel, UnderestimatorReport
from .problems.loader import load_problem
from .workflows.analysis_workflow import analyze

__version__ = "0.3.0"

__all__ = [
    "AbsMode",
    "AnalysisSettings",
    "Box",
    "Expr",
    "HessbbError",
    "HessianRoute",
    "Interval",
    "IntervalMatrix",
    "RangeForm",
    "ScalingVector",
    "SimplifyLevel",
    "UnderestimatorReport",
    "analyze",
    "eval_point",
    "format_expr",
    "load_problem",
    "outward_rounding",
    "parse",
    "to_numpy",
]

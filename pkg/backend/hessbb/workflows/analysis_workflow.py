import logging
import operator
from typing import Annotated, Any, Dict, List, Optional, Sequence, Tuple, TypedDict

from langgraph.graph import END, StateGraph

from ..config.analysis_config import build_settings
from ..core.expr import Expr, eval_point, free_vars, reindex, substitute
from ..core.interval import Box, Interval, IntervalMatrix, outward_rounding
from ..core.parser import format_expr
from ..errors import ConfigurationError, HessbbError, VerificationError
from ..models import AnalysisSettings, ScalingVector, UnderestimatorReport
from ..nodes.alpha import AlphaNode
from ..nodes.bound import BoundNode
from ..nodes.hessian import HessianNode
from ..nodes.underestimator import UnderestimatorNode
from ..nodes.verifier import VerifierNode
from ..symbolic.diff import SymMatrix

logger = logging.getLogger(__name__)


# State carried through the analysis stages (over the active variables only)
class AnalysisState(TypedDict, total=False):
    objective: Expr
    box: Box
    scaling: ScalingVector
    symbolic_hessian: Optional[SymMatrix]
    hessian_enclosure: IntervalMatrix
    alpha: List[float]
    hi_exprs: Optional[List[Expr]]
    hi_enclosures: List[Interval]
    underestimator: Expr
    lower_bound: float
    minimizer: List[float]
    iterations: int
    converged: bool
    certified_lower_bound: float
    verified_underestimation: bool
    verified_convexity: bool
    warnings: Annotated[List[str], operator.add]


STAGES = ("hessian", "alpha", "underestimator", "bound", "verifier")


def _stage(name: str, process, settings: AnalysisSettings):
    def run(state: AnalysisState) -> Dict[str, Any]:
        try:
            with outward_rounding(settings.rigorous):
                return process(state)
        except HessbbError as e:
            logger.error("❌ %s stage failed (%s): %s", name, settings.label(), e)
            raise

    return run


def create_workflow(settings: AnalysisSettings):
    """Create the analysis graph for one configuration"""
    nodes = {
        "hessian": HessianNode(settings).process,
        "alpha": AlphaNode(settings).process,
        "underestimator": UnderestimatorNode().process,
        "bound": BoundNode(settings).process,
        "verifier": VerifierNode(settings).process,
    }

    workflow = StateGraph(AnalysisState)
    for name in STAGES:
        workflow.add_node(name, _stage(name, nodes[name], settings))

    workflow.set_entry_point(STAGES[0])
    for current, following in zip(STAGES, STAGES[1:]):
        workflow.add_edge(current, following)
    workflow.add_edge(STAGES[-1], END)

    return workflow.compile()


def run_workflow(initial_state: AnalysisState, settings: AnalysisSettings) -> AnalysisState:
    """Run the analysis graph to completion"""
    return create_workflow(settings).invoke({"warnings": [], **initial_state})


def _resolve_settings(settings: Optional[AnalysisSettings], overrides: Dict[str, Any]) -> AnalysisSettings:
    base = settings if settings is not None else AnalysisSettings()
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if not overrides:
        return base
    return build_settings(**{**base.model_dump(), **overrides})


def _reduce(f: Expr, box: Box, active: Sequence[int]) -> Tuple[Expr, Box]:
    """Substitute zero-width variables by their value and renumber the rest."""
    reduced = f
    for i in range(box.dim):
        if i not in active:
            reduced = substitute(reduced, i, box[i].lo)
    mapping = {old: new for new, old in enumerate(active)}
    return reindex(reduced, mapping), Box(tuple(box[i] for i in active))


def _constant_report(f: Expr, box: Box, settings: AnalysisSettings, var_names) -> UnderestimatorReport:
    value = eval_point(f, box.lower())
    return UnderestimatorReport(
        alpha=[0.0] * box.dim,
        hessian_enclosure=IntervalMatrix(()),
        hi_enclosures=[None] * box.dim,
        lower_bound=value,
        underestimator=f,
        underestimator_text=format_expr(f, var_names),
        settings=settings,
        d_used=[None] * box.dim,
        active=[],
        minimizer=box.lower(),
        iterations=0,
        converged=True,
        verified_underestimation=True,
        verified_convexity=True,
        certified_lower_bound=value if settings.rigorous else None,
        warnings=[],
    )


def analyze(
    f: Expr,
    box: Box,
    route=None,
    mode=None,
    form=None,
    d: Optional[Sequence[float]] = None,
    settings: Optional[AnalysisSettings] = None,
    var_names: Optional[Sequence[str]] = None,
) -> UnderestimatorReport:
    """Build the underestimator of f over box and bound it from below.

    Explicit route/mode/form/d arguments override the given settings. Raises
    VerificationError (carrying the report) if g exceeds f at a sampled point.
    """
    settings = _resolve_settings(settings, {"route": route, "abs_mode": mode, "form": form,
                                            "d": tuple(d) if d is not None else None})
    if max(free_vars(f), default=-1) >= box.dim:
        raise ConfigurationError(f"objective uses x{max(free_vars(f)) + 1} but the box has {box.dim} variables")
    if settings.d is not None and len(settings.d) != box.dim:
        raise ConfigurationError(f"d has {len(settings.d)} entries for {box.dim} variables")

    active = [i for i in range(box.dim) if box[i].width > 0.0]
    logger.info("🔍 analysing %d variable(s) (%d fixed) with %s", box.dim, box.dim - len(active), settings.label())
    if not active:
        return _constant_report(f, box, settings, var_names)

    objective, reduced_box = _reduce(f, box, active)
    weights = [settings.d[i] for i in active] if settings.d is not None else reduced_box.widths()
    try:
        scaling = ScalingVector(d=tuple(weights))
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc

    state = run_workflow({"objective": objective, "box": reduced_box, "scaling": scaling}, settings)

    alpha = [0.0] * box.dim
    hi: List[Optional[Interval]] = [None] * box.dim
    d_used: List[Optional[float]] = [None] * box.dim
    for new, old in enumerate(active):
        alpha[old] = state["alpha"][new]
        hi[old] = state["hi_enclosures"][new]
        d_used[old] = scaling[new]
    minimizer = box.lower()
    for new, old in enumerate(active):
        minimizer[old] = state["minimizer"][new]
    g = reindex(state["underestimator"], {new: old for new, old in enumerate(active)})

    report = UnderestimatorReport(
        alpha=alpha,
        hessian_enclosure=state["hessian_enclosure"],
        hi_enclosures=hi,
        lower_bound=state["lower_bound"],
        underestimator=g,
        underestimator_text=format_expr(g, var_names),
        settings=settings,
        d_used=d_used,
        active=active,
        minimizer=minimizer,
        iterations=state["iterations"],
        converged=state["converged"],
        verified_underestimation=state["verified_underestimation"],
        verified_convexity=state["verified_convexity"],
        certified_lower_bound=state.get("certified_lower_bound"),
        warnings=list(state["warnings"]),
    )
    if not report.verified_underestimation:
        raise VerificationError(f"underestimator exceeds the objective ({settings.label()})", report)
    logger.info("✅ alpha=%s lower bound=%.6f", [round(a, 6) for a in alpha], report.lower_bound)
    return report

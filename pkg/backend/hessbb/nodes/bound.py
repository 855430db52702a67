import logging
from typing import List, Tuple

import numpy as np
from scipy.optimize import OptimizeResult

from ..core.expr import Expr, eval_point, to_numpy
from ..core.interval import Box, outward_rounding
from ..enclosure.range_forms import natural_eval
from ..models import AnalysisSettings
from ..optimize.projected_gradient import minimize_box
from ..symbolic.diff import gradient

logger = logging.getLogger(__name__)


def convex_lower_bound(g: Expr, box: Box, max_iter: int = 100_000) -> Tuple[float, List[float], OptimizeResult]:
    """Minimum of the convex g over box by projected gradient, started at the midpoint."""
    value_fn = to_numpy(g)
    grad_fns = [to_numpy(gi) for gi in gradient(g, box.dim, simplified=False)]

    def fun(x: np.ndarray):
        return float(value_fn(x)), np.array([float(gi(x)) for gi in grad_fns])

    result = minimize_box(fun, box.lower(), box.upper(), box.midpoint(), max_iter=max_iter)
    minimizer = [float(v) for v in result.x]
    return eval_point(g, minimizer), minimizer, result


def certified_lower_bound(g: Expr, box: Box) -> float:
    """Sound (looser) bound: lower end of the outward-rounded natural enclosure of g."""
    with outward_rounding():
        return natural_eval(g, box).lo


class BoundNode:
    def __init__(self, settings: AnalysisSettings):
        self.settings = settings

    def process(self, state):
        g, box = state["underestimator"], state["box"]
        value, minimizer, result = convex_lower_bound(g, box, self.settings.max_iter)
        update = {
            "lower_bound": value,
            "minimizer": minimizer,
            "iterations": int(result.nit),
            "converged": bool(result.success),
        }
        if not result.success:
            update["warnings"] = [f"minimizer did not converge in {result.nit} iterations"]
        if self.settings.rigorous:
            update["certified_lower_bound"] = certified_lower_bound(g, box)
        logger.info("✅ lower bound %.6f after %d iterations", value, result.nit)
        return update

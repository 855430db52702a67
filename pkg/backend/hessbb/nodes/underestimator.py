import logging
import math
from typing import Sequence

from ..core.expr import Const, Expr, Var, add, mul, sub
from ..core.interval import Box
from ..core.parser import format_expr

logger = logging.getLogger(__name__)


def build_underestimator(f: Expr, alpha: Sequence[float], box: Box) -> Expr:
    """g(x) = f(x) - sum_i alpha_i (hi_i - x_i)(x_i - lo_i); zero alphas add nothing."""
    if len(alpha) != box.dim:
        raise ValueError(f"alpha has {len(alpha)} entries for a box of dimension {box.dim}")
    terms = []
    for i, a in enumerate(alpha):
        if not math.isfinite(a) or a < 0.0:
            raise ValueError(f"alpha_{i + 1} = {a} is not a finite non-negative number")
        if a == 0.0:
            continue
        x = Var(i)
        terms.append(mul(Const(a), sub(Const(box[i].hi), x), sub(x, Const(box[i].lo))))
    if not terms:
        return f
    return sub(f, add(*terms))


class UnderestimatorNode:
    def process(self, state):
        g = build_underestimator(state["objective"], state["alpha"], state["box"])
        logger.debug("g = %s", format_expr(g))
        return {"underestimator": g}

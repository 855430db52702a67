import logging
from typing import Optional

from ..core.expr import Expr
from ..core.interval import Box, IntervalMatrix
from ..enclosure.interval_ad import interval_hessian as ad_hessian
from ..enclosure.range_forms import RangeForm, enclose
from ..models import AbsMode, AnalysisSettings, HessianRoute, SimplifyLevel
from ..symbolic.diff import SymMatrix, hessian_sym

logger = logging.getLogger(__name__)


def symbolic_hessian(f: Expr, n: int, level: SimplifyLevel = SimplifyLevel.FULL) -> SymMatrix:
    return hessian_sym(f, n, simplified=SimplifyLevel(level) is not SimplifyLevel.OFF)


def interval_hessian(
    f: Expr,
    box: Box,
    route: HessianRoute = HessianRoute.SYMBOLIC,
    form: RangeForm = RangeForm.BEST,
    hessian: Optional[SymMatrix] = None,
) -> IntervalMatrix:
    """Enclosure of the Hessian image over box.

    direct: interval automatic differentiation of f (no simplification, no range form).
    symbolic: each entry of the (given or simplified) symbolic Hessian enclosed by form.
    """
    if HessianRoute(route) is HessianRoute.DIRECT:
        return ad_hessian(f, box)
    if hessian is None:
        hessian = hessian_sym(f, box.dim)
    return IntervalMatrix.from_upper(box.dim, lambda i, j: enclose(hessian[i, j], box, form))


class HessianNode:
    def __init__(self, settings: AnalysisSettings):
        self.settings = settings
        logger.debug("Hessian stage: route=%s form=%s simplify=%s",
                     settings.route.value, settings.form.value, settings.simplify.value)

    def process(self, state):
        """Symbolic Hessian (when needed later) and its interval enclosure"""
        f, box = state["objective"], state["box"]
        settings = self.settings
        symbolic = None
        if settings.route is HessianRoute.SYMBOLIC:
            symbolic = symbolic_hessian(f, box.dim, settings.simplify)
        elif settings.abs_mode is not AbsMode.MAG:
            # the direct route builds h_i from the raw derivative trees
            symbolic = symbolic_hessian(f, box.dim, SimplifyLevel.OFF)
        enclosure = interval_hessian(f, box, settings.route, settings.form, symbolic)
        return {"symbolic_hessian": symbolic, "hessian_enclosure": enclosure}

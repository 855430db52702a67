"""Alpha vectors: scaled Gerschgorin on an interval Hessian, or row functions h_i."""

import logging
from typing import List, Optional, Sequence, Tuple

from ..core.expr import Const, Expr, Func, add, is_const, mul, neg, sub
from ..core.interval import Box, Interval, IntervalMatrix, iv_zero_in_interior
from ..core.parser import format_expr
from ..enclosure.range_forms import RangeForm, enclose
from ..errors import DegenerateIntervalError
from ..models import AbsMode, AnalysisSettings, HessianRoute, ScalingVector, SimplifyLevel
from ..symbolic.diff import SymMatrix, hessian_sym
from ..symbolic.simplify import simplify

logger = logging.getLogger(__name__)


def classical_alpha(H: IntervalMatrix, d: ScalingVector) -> List[float]:
    """alpha_i = max(0, -1/2 (lo(h_ii) - sum_{j != i} mag(h_ij) d_j / d_i))."""
    alpha = []
    for i in range(H.n):
        off = sum(H[i, j].mag * d.ratio(j, i) for j in range(H.n) if j != i)
        alpha.append(max(0.0, -0.5 * (H[i, i].lo - off)))
    return alpha


def row_enclosures(H: IntervalMatrix, d: ScalingVector) -> List[Interval]:
    """Enclosures of h_i implied by the constant-magnitude bound on each row."""
    rows = []
    for i in range(H.n):
        off = sum(H[i, j].mag * d.ratio(j, i) for j in range(H.n) if j != i)
        rows.append(Interval(H[i, i].lo - off, H[i, i].hi - off))
    return rows


def linear_abs_coeffs(y: Interval) -> Tuple[float, float]:
    """Best linear upper approximation gamma*y + beta of |y| on y, exact at both ends."""
    if y.lo == y.hi:
        raise DegenerateIntervalError(f"linear surrogate of |y| needs a proper interval, got {y}")
    span = y.hi - y.lo
    gamma = (abs(y.hi) - abs(y.lo)) / span
    beta = (y.hi * abs(y.lo) - y.lo * abs(y.hi)) / span
    return gamma, beta


def _abs_term(entry: Expr, enclosure: Interval, mode: AbsMode) -> Expr:
    """Expression standing in for |h_ij| in row i."""
    if mode is AbsMode.MAG:
        return Const(enclosure.mag)
    if not iv_zero_in_interior(enclosure):
        return entry if enclosure.lo >= 0.0 else neg(entry)
    if mode is AbsMode.SIGN_DROP:
        return Func("abs", entry)
    if mode is AbsMode.SHIFT:
        sigma = 1.0 if enclosure.mid >= 0.0 else -1.0
        shifted = enclosure if sigma > 0 else -enclosure
        return sub(mul(Const(sigma), entry), Const(shifted.lo))
    gamma, beta = linear_abs_coeffs(enclosure)
    return add(mul(Const(gamma), entry), Const(beta))


def build_hi(
    f: Expr,
    i: int,
    d: ScalingVector,
    H: IntervalMatrix,
    mode: AbsMode,
    hessian: Optional[SymMatrix] = None,
    simplified: bool = True,
) -> Expr:
    """h_i = h_ii - sum_{j != i} |h_ij| d_j / d_i with |h_ij| handled per mode."""
    if hessian is None:
        hessian = hessian_sym(f, H.n)
    mode = AbsMode(mode)
    terms = []
    for j in range(H.n):
        if j == i or is_const(hessian[i, j], 0.0):
            continue
        terms.append(mul(Const(d.ratio(j, i)), _abs_term(hessian[i, j], H[i, j], mode)))
    hi = sub(hessian[i, i], add(*terms)) if terms else hessian[i, i]
    return simplify(hi) if simplified else hi


def alpha_from_hi(hi_exprs: Sequence[Expr], box: Box, form: RangeForm = RangeForm.BEST) -> Tuple[List[float], List[Interval]]:
    enclosures = [enclose(h, box, form) for h in hi_exprs]
    return [max(0.0, -0.5 * e.lo) for e in enclosures], enclosures


class AlphaNode:
    def __init__(self, settings: AnalysisSettings):
        self.settings = settings
        self.classical = settings.route is HessianRoute.DIRECT and settings.abs_mode is AbsMode.MAG

    def process(self, state):
        """Alpha vector and row enclosures for the configured route and mode"""
        H, d, box = state["hessian_enclosure"], state["scaling"], state["box"]
        if self.classical:
            return {"alpha": classical_alpha(H, d), "hi_exprs": None, "hi_enclosures": row_enclosures(H, d)}

        simplified = (self.settings.route is HessianRoute.SYMBOLIC
                      and self.settings.simplify is SimplifyLevel.FULL)
        hi_exprs = [
            build_hi(state["objective"], i, d, H, self.settings.abs_mode, state["symbolic_hessian"], simplified)
            for i in range(H.n)
        ]
        alpha, enclosures = alpha_from_hi(hi_exprs, box, self.settings.form)
        for i, h in enumerate(hi_exprs):
            logger.debug("h_%d = %s -> %s", i + 1, format_expr(h), enclosures[i])
        return {"alpha": alpha, "hi_exprs": hi_exprs, "hi_enclosures": enclosures}

"""Range enclosures of expressions over boxes.

Four forms are available and can be intersected:

    natural  recursive interval evaluation
    mvf      mean value form with symbolic gradient enclosures
    slope    first-order slope arithmetic (never wider than mvf at the same center)
    mono     one monotonicity pass: sign-stable variables are pinned to an endpoint
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

from ..core.expr import Add, Const, Div, Expr, Func, Mul, Neg, PowInt, Sub, Var, free_vars
from ..core.interval import Box, Interval, iv_arith, iv_elem, iv_pow
from ..errors import EvaluationError, InconsistentEnclosureError, IntervalDomainError, UnsupportedNodeError
from ..symbolic.diff import diff
from ..symbolic.simplify import simplify

logger = logging.getLogger(__name__)

_ZERO = Interval(0.0, 0.0)
_ONE = Interval(1.0, 1.0)


class RangeForm(str, Enum):
    NATURAL = "natural"
    MEAN_VALUE = "mvf"
    SLOPE = "slope"
    MONOTONIC = "mono"
    BEST = "best"


DERIVED_FORMS = (RangeForm.MEAN_VALUE, RangeForm.SLOPE, RangeForm.MONOTONIC)


def intersect(a: Interval, b: Interval, rel_tol: float = 1e-12) -> Interval:
    """Intersection of two sound enclosures; empty beyond rounding is an error."""
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo <= hi:
        return Interval(lo, hi)
    if lo - hi <= rel_tol * (1.0 + max(abs(lo), abs(hi))):
        mid = 0.5 * (lo + hi)
        return Interval(mid, mid)
    raise InconsistentEnclosureError(f"enclosures {a} and {b} do not intersect")


# ---------------------------------------------------------------------------
# natural evaluation

def natural_eval(e: Expr, box: Box) -> Interval:
    """Recursive interval evaluation of e over box."""
    return _natural(e, box, ())


def _natural(e: Expr, box: Box, path: Tuple[str, ...]) -> Interval:
    if isinstance(e, Const):
        return Interval(e.value, e.value)
    if isinstance(e, Var):
        return box[e.index]
    here = path + (type(e).__name__,)
    try:
        if isinstance(e, Add):
            total = _natural(e.args[0], box, here + ("0",))
            for k, a in enumerate(e.args[1:], 1):
                total = iv_arith("add", total, _natural(a, box, here + (str(k),)))
            return total
        if isinstance(e, Mul):
            total = _natural(e.args[0], box, here + ("0",))
            for k, a in enumerate(e.args[1:], 1):
                total = iv_arith("mul", total, _natural(a, box, here + (str(k),)))
            return total
        if isinstance(e, Neg):
            return -_natural(e.child, box, here)
        if isinstance(e, Sub):
            return iv_arith("sub", _natural(e.left, box, here + ("0",)), _natural(e.right, box, here + ("1",)))
        if isinstance(e, Div):
            return iv_arith("div", _natural(e.num, box, here + ("num",)), _natural(e.den, box, here + ("den",)))
        if isinstance(e, PowInt):
            return iv_pow(_natural(e.base, box, here), e.exp)
        if isinstance(e, Func):
            return iv_elem(e.name, _natural(e.child, box, here))
    except IntervalDomainError as exc:
        raise EvaluationError(str(exc), here) from exc
    raise TypeError(f"unknown node {type(e).__name__}")


def _point_box(center: Sequence[float]) -> Box:
    return Box(tuple(Interval(c, c) for c in center))


def _check_center(box: Box, center: Optional[Sequence[float]]) -> List[float]:
    if center is None:
        return box.midpoint()
    center = [float(c) for c in center]
    if len(center) != box.dim or not box.contains_point(center):
        raise ValueError(f"center {center} is not a point of the box")
    return center


# ---------------------------------------------------------------------------
# mean value form

@lru_cache(maxsize=4096)
def _gradient_entry(e: Expr, i: int) -> Expr:
    return simplify(diff(e, i))


def mean_value_form(e: Expr, box: Box, center: Optional[Sequence[float]] = None) -> Interval:
    """f(c) + sum G_i (X_i - c_i), G_i enclosing the simplified partial derivative."""
    c = _check_center(box, center)
    natural = natural_eval(e, box)
    result = natural_eval(e, _point_box(c))
    for i in sorted(free_vars(e)):
        g = natural_eval(_gradient_entry(e, i), box)
        result = result + g * (box[i] - c[i])
    return intersect(result, natural)


# ---------------------------------------------------------------------------
# slope form

@dataclass(frozen=True)
class SlopePair:
    """value_at_center + slope . (X - c) encloses the image."""

    value_at_center: Interval
    slope: Tuple[Interval, ...]
    range: Interval


def _derivative_hull(name: str, hull: Interval) -> Interval:
    if name == "sin":
        return iv_elem("cos", hull)
    if name == "cos":
        return -iv_elem("sin", hull)
    if name == "exp":
        return iv_elem("exp", hull)
    if name == "log":
        return iv_arith("div", _ONE, hull)
    if name == "sqrt":
        if hull.lo <= 0.0:
            raise IntervalDomainError("sqrt slope needs an argument bounded away from zero", hull)
        return iv_arith("div", _ONE, Interval(2.0, 2.0) * iv_elem("sqrt", hull))
    if name == "abs":
        if hull.lo < 0.0 < hull.hi:
            return Interval(-1.0, 1.0)
        return _ONE if hull.lo >= 0.0 else Interval(-1.0, -1.0)
    raise UnsupportedNodeError(f"no slope rule for {name}")


def slope_pair(e: Expr, box: Box, center: Sequence[float]) -> SlopePair:
    """Recursive slope arithmetic of e at center over box."""
    n = box.dim

    def scale(vec, s: Interval):
        return tuple(v * s for v in vec)

    def plus(a, b):
        return tuple(x + y for x, y in zip(a, b))

    def walk(node: Expr) -> SlopePair:
        if isinstance(node, Const):
            point = Interval(node.value, node.value)
            return SlopePair(point, (_ZERO,) * n, point)
        if isinstance(node, Var):
            slope = tuple(_ONE if k == node.index else _ZERO for k in range(n))
            return SlopePair(Interval(center[node.index], center[node.index]), slope, box[node.index])
        if isinstance(node, (Add, Sub)):
            kids = node.args if isinstance(node, Add) else (node.left, node.right)
            acc = walk(kids[0])
            for k, kid in enumerate(kids[1:], 1):
                s = walk(kid)
                if isinstance(node, Sub):
                    acc = SlopePair(acc.value_at_center - s.value_at_center,
                                    plus(acc.slope, scale(s.slope, Interval(-1.0, -1.0))),
                                    acc.range - s.range)
                else:
                    acc = SlopePair(acc.value_at_center + s.value_at_center, plus(acc.slope, s.slope),
                                    acc.range + s.range)
            return acc
        if isinstance(node, Neg):
            s = walk(node.child)
            return SlopePair(-s.value_at_center, scale(s.slope, Interval(-1.0, -1.0)), -s.range)
        if isinstance(node, Mul):
            acc = walk(node.args[0])
            for kid in node.args[1:]:
                s = walk(kid)
                acc = SlopePair(acc.value_at_center * s.value_at_center,
                                plus(scale(acc.slope, s.range), scale(s.slope, acc.value_at_center)),
                                acc.range * s.range)
            return acc
        if isinstance(node, Div):
            u, v = walk(node.num), walk(node.den)
            q = u.value_at_center / v.value_at_center
            slope = tuple((su - q * sv) / v.range for su, sv in zip(u.slope, v.slope))
            return SlopePair(q, slope, u.range / v.range)
        if isinstance(node, PowInt):
            k = node.exp
            if k == 0:
                return SlopePair(_ONE, (_ZERO,) * n, _ONE)
            if k < 0:
                return walk(Div(Const(1.0), PowInt(node.base, -k)))
            u = walk(node.base)
            # divided difference of t^k between X and c: sum_m X^m c^(k-1-m)
            factor = _ZERO
            for m in range(k):
                factor = factor + iv_pow(u.range, m) * iv_pow(u.value_at_center, k - 1 - m)
            return SlopePair(iv_pow(u.value_at_center, k), scale(u.slope, factor), iv_pow(u.range, k))
        if isinstance(node, Func):
            u = walk(node.child)
            outer = _derivative_hull(node.name, u.range.hull(u.value_at_center))
            return SlopePair(iv_elem(node.name, u.value_at_center), scale(u.slope, outer),
                             iv_elem(node.name, u.range))
        raise TypeError(f"unknown node {type(node).__name__}")

    try:
        return walk(e)
    except IntervalDomainError as exc:
        raise EvaluationError(str(exc), ("slope",)) from exc


def slope_form(e: Expr, box: Box, center: Optional[Sequence[float]] = None) -> Interval:
    c = _check_center(box, center)
    pair = slope_pair(e, box, c)
    result = pair.value_at_center
    for i in range(box.dim):
        if pair.slope[i] != _ZERO:
            result = result + pair.slope[i] * (box[i] - c[i])
    return intersect(result, natural_eval(e, box))


# ---------------------------------------------------------------------------
# monotonicity

def monotonic_refine(e: Expr, box: Box) -> Interval:
    """Pin every sign-stable variable at its minimizing/maximizing endpoint, once."""
    natural = natural_eval(e, box)
    low_side, high_side = list(box.components), list(box.components)
    pinned = 0
    for i in sorted(free_vars(e)):
        g = natural_eval(_gradient_entry(e, i), box)
        x = box[i]
        if g.lo >= 0.0:
            low_side[i], high_side[i] = Interval(x.lo, x.lo), Interval(x.hi, x.hi)
        elif g.hi <= 0.0:
            low_side[i], high_side[i] = Interval(x.hi, x.hi), Interval(x.lo, x.lo)
        else:
            continue
        pinned += 1
    if not pinned:
        return natural
    lo = natural_eval(e, Box(tuple(low_side))).lo
    hi = natural_eval(e, Box(tuple(high_side))).hi
    return intersect(Interval(lo, max(lo, hi)), natural)


# ---------------------------------------------------------------------------
# selection

_FORM_FUNCS = {
    RangeForm.NATURAL: lambda e, box: natural_eval(e, box),
    RangeForm.MEAN_VALUE: lambda e, box: mean_value_form(e, box),
    RangeForm.SLOPE: lambda e, box: slope_form(e, box),
    RangeForm.MONOTONIC: lambda e, box: monotonic_refine(e, box),
}


def expand_forms(forms: Iterable) -> List[RangeForm]:
    selected: List[RangeForm] = []
    for form in forms:
        form = RangeForm(form)
        members = [RangeForm.NATURAL, *DERIVED_FORMS] if form is RangeForm.BEST else [form]
        for member in members:
            if member not in selected:
                selected.append(member)
    return selected


def best_enclosure(e: Expr, box: Box, forms: Iterable = (RangeForm.BEST,)) -> Interval:
    """Intersection of the selected forms.

    Derived forms that do not apply (abs below a derivative, sqrt at zero) are
    skipped when other forms are selected; natural evaluation errors propagate.
    """
    selected = expand_forms(forms)
    if not selected:
        raise ValueError("at least one range form is required")
    result: Optional[Interval] = None
    for form in selected:
        try:
            enclosure = _FORM_FUNCS[form](e, box)
        except (UnsupportedNodeError, EvaluationError) as exc:
            if form is RangeForm.NATURAL or len(selected) == 1:
                raise
            logger.debug("range form %s skipped: %s", form.value, exc)
            continue
        result = enclosure if result is None else intersect(result, enclosure)
    if result is None:
        raise EvaluationError("no selected range form applies", (RangeForm.BEST.value,))
    return result


def enclose(e: Expr, box: Box, form) -> Interval:
    form = RangeForm(form)
    if form is RangeForm.BEST:
        return best_enclosure(e, box)
    return _FORM_FUNCS[form](e, box)

"""Forward-mode interval automatic differentiation to second order.

Every node carries (value, gradient, Hessian) as intervals over the box.
Entries that are structurally zero are stored as None so that exact zeros in the
result are not widened by rounding.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from ..core.expr import Add, Const, Div, Expr, Func, Mul, Neg, PowInt, Sub, Var
from ..core.interval import Box, Interval, IntervalMatrix, iv_elem, iv_pow
from ..errors import EvaluationError, IntervalDomainError, UnsupportedNodeError

logger = logging.getLogger(__name__)

Entry = Optional[Interval]

_ZERO = Interval(0.0, 0.0)


def _add(a: Entry, b: Entry) -> Entry:
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _mul(a: Entry, b: Entry) -> Entry:
    if a is None or b is None:
        return None
    return a * b


def _neg(a: Entry) -> Entry:
    return None if a is None else -a


def _sum(*terms: Entry) -> Entry:
    total = None
    for t in terms:
        total = _add(total, t)
    return total


@dataclass(frozen=True)
class HessianTriple:
    value: Interval
    grad: Tuple[Entry, ...]
    hess: Tuple[Tuple[Entry, ...], ...]  # upper triangle, hess[i][j - i]

    def h(self, i: int, j: int) -> Entry:
        if i > j:
            i, j = j, i
        return self.hess[i][j - i]


def _constant(value: Interval, n: int) -> HessianTriple:
    return HessianTriple(value, (None,) * n, tuple((None,) * (n - i) for i in range(n)))


def _combine(value: Interval, n: int, grad_fn, hess_fn) -> HessianTriple:
    grad = tuple(grad_fn(i) for i in range(n))
    hess = tuple(tuple(hess_fn(i, j) for j in range(i, n)) for i in range(n))
    return HessianTriple(value, grad, hess)


def _times(a: HessianTriple, b: HessianTriple, n: int) -> HessianTriple:
    return _combine(
        a.value * b.value,
        n,
        lambda i: _add(_mul(a.grad[i], b.value), _mul(a.value, b.grad[i])),
        lambda i, j: _sum(
            _mul(a.h(i, j), b.value),
            _mul(a.grad[i], b.grad[j]),
            _mul(a.grad[j], b.grad[i]),
            _mul(a.value, b.h(i, j)),
        ),
    )


def _square(u: HessianTriple, n: int) -> HessianTriple:
    two = Interval(2.0, 2.0)

    def hess(i, j):
        if i == j:
            gi = u.grad[i]
            first = None if gi is None else two * iv_pow(gi, 2)
        else:
            first = _mul(_mul(two, u.grad[i]), u.grad[j])
        return _add(first, _mul(_mul(two, u.value), u.h(i, j)))

    return _combine(
        iv_pow(u.value, 2),
        n,
        lambda i: _mul(_mul(two, u.value), u.grad[i]),
        hess,
    )


def _quotient(u: HessianTriple, v: HessianTriple, n: int) -> HessianTriple:
    c = u.value / v.value
    grad = tuple(
        None if (u.grad[i] is None and v.grad[i] is None)
        else _add(u.grad[i], _neg(_mul(c, v.grad[i]))) / v.value
        for i in range(n)
    )

    def hess(i, j):
        numerator = _sum(
            u.h(i, j),
            _neg(_mul(grad[i], v.grad[j])),
            _neg(_mul(grad[j], v.grad[i])),
            _neg(_mul(c, v.h(i, j))),
        )
        return None if numerator is None else numerator / v.value

    return HessianTriple(c, grad, tuple(tuple(hess(i, j) for j in range(i, n)) for i in range(n)))


def _first_second(name: str, x: Interval) -> Tuple[Interval, Interval, Interval]:
    """(phi(x), phi'(x), phi''(x)) over x."""
    if name == "sin":
        return iv_elem("sin", x), iv_elem("cos", x), -iv_elem("sin", x)
    if name == "cos":
        return iv_elem("cos", x), -iv_elem("sin", x), -iv_elem("cos", x)
    if name == "exp":
        e = iv_elem("exp", x)
        return e, e, e
    if name == "log":
        return iv_elem("log", x), iv_pow(x, -1), -iv_pow(x, -2)
    if name == "sqrt":
        if x.lo <= 0.0:
            raise IntervalDomainError("sqrt derivative needs an argument bounded away from zero", x)
        r = iv_elem("sqrt", x)
        return r, Interval(0.5, 0.5) / r, Interval(-0.25, -0.25) / (r * x)
    if name == "abs":
        raise UnsupportedNodeError("abs() is not twice differentiable")
    raise UnsupportedNodeError(f"no derivative rule for {name}")


def _apply(name: str, u: HessianTriple, n: int) -> HessianTriple:
    value, d1, d2 = _first_second(name, u.value)
    return _combine(
        value,
        n,
        lambda i: _mul(d1, u.grad[i]),
        lambda i, j: _add(_mul(_mul(d2, u.grad[i]), u.grad[j]), _mul(d1, u.h(i, j))),
    )


def propagate(e: Expr, box: Box) -> HessianTriple:
    n = box.dim

    def walk(node: Expr, path: Tuple[str, ...]) -> HessianTriple:
        if isinstance(node, Const):
            return _constant(Interval(node.value, node.value), n)
        if isinstance(node, Var):
            grad = tuple(Interval(1.0, 1.0) if k == node.index else None for k in range(n))
            return HessianTriple(box[node.index], grad, tuple((None,) * (n - i) for i in range(n)))
        here = path + (type(node).__name__,)
        try:
            if isinstance(node, Add):
                acc = walk(node.args[0], here + ("0",))
                for k, a in enumerate(node.args[1:], 1):
                    t = walk(a, here + (str(k),))
                    acc = _combine(acc.value + t.value, n,
                                   lambda i, acc=acc, t=t: _add(acc.grad[i], t.grad[i]),
                                   lambda i, j, acc=acc, t=t: _add(acc.h(i, j), t.h(i, j)))
                return acc
            if isinstance(node, Sub):
                a, b = walk(node.left, here + ("0",)), walk(node.right, here + ("1",))
                return _combine(a.value - b.value, n,
                                lambda i: _add(a.grad[i], _neg(b.grad[i])),
                                lambda i, j: _add(a.h(i, j), _neg(b.h(i, j))))
            if isinstance(node, Neg):
                a = walk(node.child, here)
                return _combine(-a.value, n, lambda i: _neg(a.grad[i]), lambda i, j: _neg(a.h(i, j)))
            if isinstance(node, Mul):
                acc = walk(node.args[0], here + ("0",))
                for k, a in enumerate(node.args[1:], 1):
                    acc = _times(acc, walk(a, here + (str(k),)), n)
                return acc
            if isinstance(node, Div):
                return _quotient(walk(node.num, here + ("num",)), walk(node.den, here + ("den",)), n)
            if isinstance(node, PowInt):
                k = node.exp
                if k == 0:
                    return _constant(Interval(1.0, 1.0), n)
                if k < 0:
                    return _quotient(_constant(Interval(1.0, 1.0), n), walk(PowInt(node.base, -k), path), n)
                u = walk(node.base, here)
                if k == 1:
                    return u
                if not isinstance(node.base, Var):
                    # composite bases are multiplied out factor by factor, u*u*...*u
                    acc = u
                    for _ in range(k - 1):
                        acc = _times(acc, u, n)
                    return acc
                acc = _square(u, n)
                for _ in range(k - 2):
                    acc = _times(acc, u, n)
                if k % 2 == 0:
                    # keep the exact even-power range in the value slot
                    acc = HessianTriple(iv_pow(u.value, k), acc.grad, acc.hess)
                return acc
            if isinstance(node, Func):
                return _apply(node.name, walk(node.child, here), n)
        except IntervalDomainError as exc:
            raise EvaluationError(str(exc), here) from exc
        raise TypeError(f"unknown node {type(node).__name__}")

    return walk(e, ())


def interval_hessian(e: Expr, box: Box) -> IntervalMatrix:
    """Interval Hessian of e over box by interval AD; structural zeros are exact [0,0]."""
    triple = propagate(e, box)
    n = box.dim
    logger.debug("interval AD Hessian over %d variables", n)

    def entry(i: int, j: int) -> Interval:
        value = triple.h(i, j)
        return _ZERO if value is None else value

    return IntervalMatrix.from_upper(n, entry)


def interval_gradient(e: Expr, box: Box) -> List[Interval]:
    triple = propagate(e, box)
    return [_ZERO if g is None else g for g in triple.grad]

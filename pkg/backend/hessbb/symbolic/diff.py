"""Symbolic differentiation and symbolic Hessians.

Derivatives are built through the smart constructors only, so they come out
factored (the chain rule output is never expanded).
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

from ..core.expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Div,
    Expr,
    Func,
    Mul,
    Neg,
    PowInt,
    Sub,
    Var,
    add,
    div,
    free_vars,
    func,
    mul,
    neg,
    pow_int,
    sub,
)
from ..errors import UnsupportedNodeError
from .simplify import simplify

logger = logging.getLogger(__name__)


@lru_cache(maxsize=16384)
def diff(e: Expr, i: int) -> Expr:
    """Partial derivative of e with respect to Var(i)."""
    if i not in free_vars(e):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Add):
        return add(*(diff(a, i) for a in e.args))
    if isinstance(e, Sub):
        return sub(diff(e.left, i), diff(e.right, i))
    if isinstance(e, Neg):
        return neg(diff(e.child, i))
    if isinstance(e, Mul):
        terms = []
        for k, a in enumerate(e.args):
            da = diff(a, i)
            if da != ZERO:
                terms.append(mul(*e.args[:k], da, *e.args[k + 1:]))
        return add(*terms)
    if isinstance(e, Div):
        u, v = e.num, e.den
        du, dv = diff(u, i), diff(v, i)
        if dv == ZERO:
            return div(du, v)
        return div(sub(mul(du, v), mul(u, dv)), pow_int(v, 2))
    if isinstance(e, PowInt):
        return mul(Const(e.exp), pow_int(e.base, e.exp - 1), diff(e.base, i))
    if isinstance(e, Func):
        return mul(_outer_derivative(e.name, e.child), diff(e.child, i))
    raise TypeError(f"unknown node {type(e).__name__}")


def _outer_derivative(name: str, u: Expr) -> Expr:
    if name == "sin":
        return func("cos", u)
    if name == "cos":
        return neg(func("sin", u))
    if name == "exp":
        return func("exp", u)
    if name == "log":
        return div(ONE, u)
    if name == "sqrt":
        return div(ONE, mul(Const(2.0), func("sqrt", u)))
    if name == "abs":
        raise UnsupportedNodeError("cannot differentiate through abs(); the objective must be smooth")
    raise UnsupportedNodeError(f"no derivative rule for {name}")


def gradient(e: Expr, n: int, simplified: bool = True) -> List[Expr]:
    if simplified:
        return [simplify(diff(e, i)) for i in range(n)]
    return [diff(e, i) for i in range(n)]


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric grid of expressions; (i,j) and (j,i) hold the same object."""

    entries: Tuple[Tuple[Expr, ...], ...]
    symmetric: bool = True

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: Tuple[int, int]) -> Expr:
        i, j = ij
        return self.entries[i][j]


def hessian_sym(f: Expr, n: int, simplified: bool = True) -> SymMatrix:
    """Upper triangle of the symbolic Hessian, mirrored."""
    first = [diff(f, i) for i in range(n)]
    grid: List[List[Expr]] = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            entry = diff(first[i], j)
            if simplified:
                entry = simplify(entry)
            grid[i][j] = grid[j][i] = entry
    logger.debug("symbolic Hessian built (n=%d, simplified=%s)", n, simplified)
    return SymMatrix(tuple(tuple(row) for row in grid), True)

"""Expression trees for objectives and their derivatives.

Variables are positional (``Var(0)`` is the first declared variable); names only
exist at the parser/printer boundary.  Nodes are immutable and compare
structurally, so they can be used as dictionary keys by the simplifier.

The lower-case constructors (``add``, ``mul``, ``neg`` ...) fold constants and
drop neutral elements; the node classes themselves never rewrite anything.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, List, Mapping, Sequence, Tuple, Union

import numpy as np

from ..errors import EvaluationError

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k: int):
        return pow_int(self, k)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Var(Expr):
    index: int


@dataclass(frozen=True)
class Add(Expr):
    args: Tuple[Expr, ...]


@dataclass(frozen=True)
class Mul(Expr):
    args: Tuple[Expr, ...]


@dataclass(frozen=True)
class Neg(Expr):
    child: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True)
class PowInt(Expr):
    base: Expr
    exp: int


@dataclass(frozen=True)
class Func(Expr):
    name: str
    child: Expr


ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(value: Union[Expr, float, int]) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(value)


def is_const(e: Expr, value: float = None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


# ---------------------------------------------------------------------------
# smart constructors

def const(value: float) -> Const:
    return Const(value)


def add(*args: Expr) -> Expr:
    terms: List[Expr] = []
    total = 0.0
    for a in args:
        parts = a.args if isinstance(a, Add) else (a,)
        for p in parts:
            if isinstance(p, Const):
                total += p.value
            else:
                terms.append(p)
    if total != 0.0:
        terms.insert(0, Const(total))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def mul(*args: Expr) -> Expr:
    factors: List[Expr] = []
    coef = 1.0
    for a in args:
        parts = a.args if isinstance(a, Mul) else (a,)
        for p in parts:
            while isinstance(p, Neg):
                coef = -coef
                p = p.child
            if isinstance(p, Const):
                coef *= p.value
            else:
                factors.append(p)
    if coef == 0.0:
        return ZERO
    if not factors:
        return Const(coef)
    body = factors[0] if len(factors) == 1 else Mul(tuple(factors))
    if coef == 1.0:
        return body
    if coef == -1.0:
        return Neg(body)
    if isinstance(body, Mul):
        return Mul((Const(coef),) + body.args)
    return Mul((Const(coef), body))


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.child
    if isinstance(a, Mul) and isinstance(a.args[0], Const):
        return mul(Const(-a.args[0].value), *a.args[1:])
    return Neg(a)


def sub(a: Expr, b: Expr) -> Expr:
    if is_const(b, 0.0):
        return a
    if is_const(a, 0.0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if isinstance(b, Neg):
        return add(a, b.child)
    return Sub(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if is_const(b, 1.0):
        return a
    if is_const(a, 0.0):
        return ZERO
    if is_const(b, -1.0):
        return neg(a)
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    return Div(a, b)


def pow_int(a: Expr, k: int) -> Expr:
    k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return a
    if isinstance(a, Const) and (a.value != 0.0 or k > 0):
        return Const(a.value ** k)
    if isinstance(a, PowInt):
        return pow_int(a.base, a.exp * k)
    return PowInt(a, k)


_POINT_FUNCS: Dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}


def func(name: str, a: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function: {name}")
    if isinstance(a, Const):
        try:
            return Const(_POINT_FUNCS[name](a.value))
        except (ValueError, OverflowError):
            pass
    return Func(name, a)


# ---------------------------------------------------------------------------
# structure

def children(e: Expr) -> Tuple[Expr, ...]:
    if isinstance(e, (Add, Mul)):
        return e.args
    if isinstance(e, (Neg, Func)):
        return (e.child,)
    if isinstance(e, Sub):
        return (e.left, e.right)
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, PowInt):
        return (e.base,)
    return ()


def rebuild(e: Expr, new_children: Sequence[Expr]) -> Expr:
    """Same node type over new children, through the smart constructors."""
    if isinstance(e, Add):
        return add(*new_children)
    if isinstance(e, Mul):
        return mul(*new_children)
    if isinstance(e, Neg):
        return neg(new_children[0])
    if isinstance(e, Sub):
        return sub(new_children[0], new_children[1])
    if isinstance(e, Div):
        return div(new_children[0], new_children[1])
    if isinstance(e, PowInt):
        return pow_int(new_children[0], e.exp)
    if isinstance(e, Func):
        return func(e.name, new_children[0])
    return e


@lru_cache(maxsize=65536)
def free_vars(e: Expr) -> FrozenSet[int]:
    if isinstance(e, Var):
        return frozenset((e.index,))
    result: FrozenSet[int] = frozenset()
    for c in children(e):
        result |= free_vars(c)
    return result


@lru_cache(maxsize=65536)
def node_count(e: Expr) -> int:
    return 1 + sum(node_count(c) for c in children(e))


@lru_cache(maxsize=65536)
def canonical_key(e: Expr) -> str:
    """Deterministic serialization used for ordering and tie-breaking."""
    if isinstance(e, Const):
        return f"0:{e.value!r}"
    if isinstance(e, Var):
        return f"1:x{e.index:04d}"
    if isinstance(e, Func):
        return f"2:{e.name}({canonical_key(e.child)})"
    if isinstance(e, PowInt):
        return f"3:({canonical_key(e.base)})^{e.exp}"
    inner = ",".join(canonical_key(c) for c in children(e))
    return f"4:{type(e).__name__}({inner})"


def substitute(e: Expr, index: int, value: float) -> Expr:
    """Replace Var(index) by a constant."""
    if isinstance(e, Var):
        return Const(value) if e.index == index else e
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, [substitute(c, index, value) for c in kids])


def reindex(e: Expr, mapping: Mapping[int, int]) -> Expr:
    """Renumber variables; every free variable must be a key of mapping."""
    if isinstance(e, Var):
        return Var(mapping[e.index])
    kids = children(e)
    if not kids:
        return e
    return type(e)(*_fields_with(e, [reindex(c, mapping) for c in kids]))


def _fields_with(e: Expr, kids: List[Expr]):
    if isinstance(e, (Add, Mul)):
        return (tuple(kids),)
    if isinstance(e, Neg):
        return (kids[0],)
    if isinstance(e, (Sub, Div)):
        return (kids[0], kids[1])
    if isinstance(e, PowInt):
        return (kids[0], e.exp)
    if isinstance(e, Func):
        return (e.name, kids[0])
    raise TypeError(type(e).__name__)


# ---------------------------------------------------------------------------
# point evaluation

def eval_point(e: Expr, point: Sequence[float]) -> float:
    """Real value of e at point; domain violations raise EvaluationError."""
    return _eval(e, point, ())


def _eval(e: Expr, point: Sequence[float], path: Tuple[str, ...]) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        if e.index >= len(point):
            raise EvaluationError(f"variable x{e.index + 1} outside point of dimension {len(point)}", path)
        return float(point[e.index])
    here = path + (type(e).__name__,)
    if isinstance(e, Add):
        return math.fsum(_eval(c, point, here + (str(k),)) for k, c in enumerate(e.args))
    if isinstance(e, Mul):
        value = 1.0
        for k, c in enumerate(e.args):
            value *= _eval(c, point, here + (str(k),))
        return value
    if isinstance(e, Neg):
        return -_eval(e.child, point, here)
    if isinstance(e, Sub):
        return _eval(e.left, point, here + ("0",)) - _eval(e.right, point, here + ("1",))
    if isinstance(e, Div):
        den = _eval(e.den, point, here + ("den",))
        if den == 0.0:
            raise EvaluationError("division by zero", here)
        return _eval(e.num, point, here + ("num",)) / den
    if isinstance(e, PowInt):
        base = _eval(e.base, point, here)
        if base == 0.0 and e.exp < 0:
            raise EvaluationError("negative power of zero", here)
        return base ** e.exp
    if isinstance(e, Func):
        arg = _eval(e.child, point, here)
        try:
            return _POINT_FUNCS[e.name](arg)
        except (ValueError, OverflowError) as exc:
            raise EvaluationError(f"{e.name}({arg!r}): {exc}", here + (e.name,)) from exc
    raise TypeError(f"unknown node {type(e).__name__}")


# ---------------------------------------------------------------------------
# numpy compilation

_NUMPY_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


def _compile(e: Expr) -> Callable:
    if isinstance(e, Const):
        value = e.value
        return lambda X: value
    if isinstance(e, Var):
        i = e.index
        return lambda X: X[i]
    if isinstance(e, Add):
        parts = [_compile(c) for c in e.args]

        def _add(X):
            total = parts[0](X)
            for p in parts[1:]:
                total = total + p(X)
            return total
        return _add
    if isinstance(e, Mul):
        parts = [_compile(c) for c in e.args]

        def _mul(X):
            total = parts[0](X)
            for p in parts[1:]:
                total = total * p(X)
            return total
        return _mul
    if isinstance(e, Neg):
        c = _compile(e.child)
        return lambda X: -c(X)
    if isinstance(e, Sub):
        left, right = _compile(e.left), _compile(e.right)
        return lambda X: left(X) - right(X)
    if isinstance(e, Div):
        num, den = _compile(e.num), _compile(e.den)
        return lambda X: num(X) / den(X)
    if isinstance(e, PowInt):
        base, k = _compile(e.base), e.exp
        if k < 0:
            return lambda X: 1.0 / np.power(base(X), -k)
        return lambda X: np.power(base(X), k)
    if isinstance(e, Func):
        c, fn = _compile(e.child), _NUMPY_FUNCS[e.name]
        return lambda X: fn(c(X))
    raise TypeError(f"unknown node {type(e).__name__}")


def to_numpy(e: Expr) -> Callable[[np.ndarray], np.ndarray]:
    """Compile e to a vectorised function of X with shape (n, ...)."""
    body = _compile(e)

    def evaluate(X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        with np.errstate(all="ignore"):
            value = np.asarray(body(X), dtype=float)
        return np.broadcast_to(value, X.shape[1:]) if value.shape != X.shape[1:] else value

    return evaluate

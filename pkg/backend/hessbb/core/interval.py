"""Closed real intervals, boxes and interval matrices.

Endpoint arithmetic is round-to-nearest by default. Inside an
``outward_rounding()`` block every computed endpoint is pushed one ulp outwards,
which gives conservative enclosures at the cost of slightly wider results.
"""

import math
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Callable, Iterator, List, Sequence, Tuple, Union

from ..errors import IntervalDomainError

Number = Union[int, float]

_OUTWARD: ContextVar[bool] = ContextVar("hessbb_outward_rounding", default=False)
_TWO_PI = 2.0 * math.pi


@contextmanager
def outward_rounding(enabled: bool = True):
    """Enable (or disable) outward endpoint rounding for the enclosed block."""
    token = _OUTWARD.set(enabled)
    try:
        yield
    finally:
        _OUTWARD.reset(token)


def _make(lo: float, hi: float) -> "Interval":
    if _OUTWARD.get():
        lo = math.nextafter(lo, -math.inf)
        hi = math.nextafter(hi, math.inf)
    return Interval(lo, hi)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise IntervalDomainError("interval endpoints must be finite", (lo, hi))
        if lo > hi:
            raise IntervalDomainError("interval with lo > hi", (lo, hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, value: Number) -> "Interval":
        return cls(value, value)

    @classmethod
    def coerce(cls, value: Union["Interval", Number]) -> "Interval":
        if isinstance(value, Interval):
            return value
        return cls(value, value)

    # statistics

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Number, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Interval") -> Union["Interval", None]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval(lo, hi)

    def to_list(self) -> List[float]:
        return [self.lo, self.hi]

    # operators

    def __add__(self, other):
        return iv_arith("add", self, Interval.coerce(other))

    def __radd__(self, other):
        return iv_arith("add", Interval.coerce(other), self)

    def __sub__(self, other):
        return iv_arith("sub", self, Interval.coerce(other))

    def __rsub__(self, other):
        return iv_arith("sub", Interval.coerce(other), self)

    def __mul__(self, other):
        return iv_arith("mul", self, Interval.coerce(other))

    def __rmul__(self, other):
        return iv_arith("mul", Interval.coerce(other), self)

    def __truediv__(self, other):
        return iv_arith("div", self, Interval.coerce(other))

    def __rtruediv__(self, other):
        return iv_arith("div", Interval.coerce(other), self)

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __pow__(self, k: int):
        return iv_pow(self, k)

    def __str__(self):
        return f"[{self.lo:.6g}, {self.hi:.6g}]"


def iv_arith(op: str, a: Interval, b: Interval) -> Interval:
    """Exact image of a binary arithmetic operation on two intervals."""
    if op == "add":
        return _make(a.lo + b.lo, a.hi + b.hi)
    if op == "sub":
        return _make(a.lo - b.hi, a.hi - b.lo)
    if op == "mul":
        products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
        return _make(min(products), max(products))
    if op == "div":
        if not (b.lo > 0.0 or b.hi < 0.0):
            raise IntervalDomainError("division by an interval containing zero", b)
        quotients = (a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi)
        return _make(min(quotients), max(quotients))
    raise ValueError(f"unknown interval operation: {op}")


def iv_pow(a: Interval, k: int) -> Interval:
    """Exact image of x -> x**k; even powers never dip below zero."""
    if k == 0:
        return Interval(1.0, 1.0)
    if k < 0:
        if a.lo <= 0.0 <= a.hi:
            raise IntervalDomainError(f"negative power {k} of an interval containing zero", a)
        return iv_arith("div", Interval(1.0, 1.0), iv_pow(a, -k))
    if k == 1:
        return a
    lo_k, hi_k = a.lo ** k, a.hi ** k
    if k % 2 == 1 or a.lo >= 0.0:
        return _make(lo_k, hi_k)
    if a.hi <= 0.0:
        return _make(hi_k, lo_k)
    return _make(0.0, max(lo_k, hi_k))


def _hits(lo: float, hi: float, offset: float) -> bool:
    """True if offset + 2*pi*k lies in [lo, hi] for some integer k."""
    k = math.ceil((lo - offset) / _TWO_PI)
    return offset + _TWO_PI * k <= hi


def _periodic_image(fn: Callable[[float], float], a: Interval, peak: float, trough: float) -> Interval:
    if a.width >= _TWO_PI:
        return Interval(-1.0, 1.0)
    ends = (fn(a.lo), fn(a.hi))
    lo, hi = min(ends), max(ends)
    if _hits(a.lo, a.hi, peak):
        hi = 1.0
    if _hits(a.lo, a.hi, trough):
        lo = -1.0
    iv = _make(lo, hi)
    return Interval(max(iv.lo, -1.0), min(iv.hi, 1.0))


ELEMENTARY = ("sin", "cos", "exp", "log", "sqrt", "abs")


def iv_elem(fn: str, a: Interval) -> Interval:
    """Exact image of an elementary function over an interval."""
    if fn == "exp":
        return _make(math.exp(a.lo), math.exp(a.hi))
    if fn == "log":
        if a.lo <= 0.0:
            raise IntervalDomainError("log of an interval reaching zero or below", a)
        return _make(math.log(a.lo), math.log(a.hi))
    if fn == "sqrt":
        if a.lo < 0.0:
            raise IntervalDomainError("sqrt of an interval with negative part", a)
        iv = _make(math.sqrt(a.lo), math.sqrt(a.hi))
        return Interval(max(iv.lo, 0.0), iv.hi)
    if fn == "abs":
        if a.lo >= 0.0:
            return a
        if a.hi <= 0.0:
            return Interval(-a.hi, -a.lo)
        return Interval(0.0, max(-a.lo, a.hi))
    if fn == "sin":
        return _periodic_image(math.sin, a, 0.5 * math.pi, -0.5 * math.pi)
    if fn == "cos":
        return _periodic_image(math.cos, a, 0.0, math.pi)
    raise ValueError(f"unknown elementary function: {fn}")


def iv_stats(a: Interval) -> Tuple[float, float, float]:
    """(mid, rad, mag) of an interval."""
    return a.mid, a.rad, a.mag


def iv_zero_in_interior(a: Interval) -> bool:
    return a.lo < 0.0 < a.hi


@dataclass(frozen=True)
class Box:
    components: Tuple[Interval, ...]

    def __post_init__(self):
        components = tuple(Interval.coerce(c) for c in self.components)
        if not components:
            raise IntervalDomainError("a box needs at least one component")
        object.__setattr__(self, "components", components)

    @classmethod
    def from_bounds(cls, bounds: Sequence[Sequence[Number]]) -> "Box":
        return cls(tuple(Interval(lo, hi) for lo, hi in bounds))

    @property
    def dim(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> Interval:
        return self.components[i]

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.components)

    def lower(self) -> List[float]:
        return [c.lo for c in self.components]

    def upper(self) -> List[float]:
        return [c.hi for c in self.components]

    def midpoint(self) -> List[float]:
        return [c.mid for c in self.components]

    def widths(self) -> List[float]:
        return [c.width for c in self.components]

    def contains_point(self, point: Sequence[float]) -> bool:
        return all(c.contains(x) for c, x in zip(self.components, point))

    def replace(self, i: int, value: Interval) -> "Box":
        components = list(self.components)
        components[i] = value
        return Box(tuple(components))

    def to_list(self) -> List[List[float]]:
        return [c.to_list() for c in self.components]


@dataclass(frozen=True)
class IntervalMatrix:
    entries: Tuple[Tuple[Interval, ...], ...]
    symmetric: bool = True

    def __post_init__(self):
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise ValueError("interval matrix must be square")
        if self.symmetric:
            for i in range(n):
                for j in range(i + 1, n):
                    if self.entries[i][j] != self.entries[j][i]:
                        raise ValueError(f"entry ({i},{j}) differs from ({j},{i})")

    @classmethod
    def from_upper(cls, n: int, entry: Callable[[int, int], Interval]) -> "IntervalMatrix":
        """Build a symmetric matrix from a function evaluated on the upper triangle."""
        grid = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                grid[i][j] = grid[j][i] = entry(i, j)
        return cls(tuple(tuple(row) for row in grid), True)

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: Tuple[int, int]) -> Interval:
        i, j = ij
        return self.entries[i][j]

    def to_list(self) -> List[List[List[float]]]:
        return [[iv.to_list() for iv in row] for row in self.entries]

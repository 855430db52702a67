"""Simplification by like-term collection over an atom basis.

An expression is read into a polynomial whose monomials are products of atoms
raised to (possibly negative) integer powers, with exact rational coefficients.
Atoms are variables, function applications with simplified arguments, and sums
that could not be distributed (kept as a unit, e.g. ``(x1-x4)``).

Reading back out of that form does the rest:

* terms sharing the same denominator atoms are put over one denominator;
* a polynomial group whose terms all share an atom has it factored out;
* inside a factored group, a bare ``c*(sum)`` is distributed so the
  residual can collect (this is how ``2e^y e^y - 2(1+x-e^y)e^y - e^y``
  collapses to ``e^y(-3-2x+4e^y)``).

``simplify`` repeats read/write until a fixed point, keeping a round only when it
does not grow the tree.
"""

import logging
import math
from fractions import Fraction
from functools import reduce
from typing import Dict, List, Optional, Tuple

from ..core.expr import (
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
    canonical_key,
    div,
    func,
    is_const,
    mul,
    neg,
    node_count,
    pow_int,
)

logger = logging.getLogger(__name__)

MAX_ROUNDS = 16

Mono = Tuple[Tuple[Expr, int], ...]
Poly = Dict[Mono, Fraction]
Part = Tuple[tuple, bool, Expr]


def _mono_key(m: Mono) -> tuple:
    return tuple((canonical_key(a), k) for a, k in m)


def _is_sum_atom(a: Expr) -> bool:
    return isinstance(a, (Add, Sub))


def _is_exp(a: Expr) -> bool:
    return isinstance(a, Func) and a.name == "exp"


# ---------------------------------------------------------------------------
# monomials and polynomials

def _normalize(atoms: Dict[Expr, int]) -> Tuple[Fraction, Mono]:
    """Drop zero powers, merge distinct exp() atoms, sort canonically."""
    factor = Fraction(1)
    entries = [(a, k) for a, k in atoms.items() if k != 0]
    exps = [(a, k) for a, k in entries if _is_exp(a)]
    if len(exps) > 1:
        exponent: Poly = {}
        for a, k in exps:
            exponent = _padd(exponent, to_poly(a.child), Fraction(k))
        merged = from_poly(exponent)
        entries = [(a, k) for a, k in entries if not _is_exp(a)]
        if isinstance(merged, Const):
            factor = Fraction(math.exp(merged.value))
        else:
            entries.append((Func("exp", merged), 1))
    return factor, tuple(sorted(entries, key=lambda ak: canonical_key(ak[0])))


def _mono_mul(m1: Mono, m2: Mono) -> Tuple[Fraction, Mono]:
    atoms = dict(m1)
    for a, k in m2:
        atoms[a] = atoms.get(a, 0) + k
    return _normalize(atoms)


def _mono_pow(m: Mono, k: int) -> Tuple[Fraction, Mono]:
    return _normalize({a: e * k for a, e in m})


def _mono_div(m: Mono, d: Mono) -> Mono:
    atoms = dict(m)
    for a, k in d:
        atoms[a] = atoms.get(a, 0) - k
    return tuple(sorted(((a, k) for a, k in atoms.items() if k != 0), key=lambda ak: canonical_key(ak[0])))


def _padd(p: Poly, q: Poly, scale: Fraction = Fraction(1)) -> Poly:
    result = dict(p)
    for m, c in q.items():
        value = result.get(m, Fraction(0)) + scale * c
        if value:
            result[m] = value
        else:
            result.pop(m, None)
    return result


def _pscale(p: Poly, scale: Fraction) -> Poly:
    if not scale:
        return {}
    return {m: c * scale for m, c in p.items()}


def _pmul(p: Poly, q: Poly) -> Poly:
    result: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            factor, m = _mono_mul(m1, m2)
            result = _padd(result, {m: c1 * c2 * factor})
    return result


def _single(p: Poly) -> Tuple[Mono, Fraction]:
    (m, c), = p.items()
    return m, c


def _common(items: List[Tuple[Mono, Fraction]]) -> Tuple[Fraction, Mono]:
    """Integer content and the atoms shared by every term (lowest power)."""
    shared: Optional[Dict[Expr, int]] = None
    for m, _ in items:
        powers = dict(m)
        if shared is None:
            shared = powers
        else:
            shared = {a: min(k, powers[a]) for a, k in shared.items() if a in powers}
    shared = {a: k for a, k in (shared or {}).items() if k != 0}
    coefs = [c for _, c in items]
    if all(c.denominator == 1 for c in coefs):
        content = Fraction(reduce(math.gcd, (abs(c.numerator) for c in coefs)))
    else:
        content = Fraction(1)
    return content, tuple(sorted(shared.items(), key=lambda ak: canonical_key(ak[0])))


def _atomize(p: Poly) -> Poly:
    """Rewrite a multi-term polynomial as one monomial content*F*S."""
    items = sorted(p.items(), key=lambda mc: _mono_key(mc[0]))
    content, shared = _common(items)
    residual = {_mono_div(m, shared): c / content for m, c in items}
    leading = next((c for m, c in sorted(residual.items(), key=lambda mc: _mono_key(mc[0])) if m), None)
    if leading is not None and leading < 0:
        content = -content
        residual = _pscale(residual, Fraction(-1))
    if len(residual) == 1:
        factor, m = _mono_mul(shared, _single(residual)[0])
        return {m: content * _single(residual)[1] * factor}
    unit = from_poly(residual)
    factor, m = _mono_mul(shared, ((unit, 1),))
    return {m: content * factor}


# ---------------------------------------------------------------------------
# reading an expression

def to_poly(e: Expr) -> Poly:
    if isinstance(e, Const):
        return {(): Fraction(e.value)} if e.value else {}
    if isinstance(e, Var):
        return {((e, 1),): Fraction(1)}
    if isinstance(e, Add):
        result: Poly = {}
        for a in e.args:
            result = _padd(result, to_poly(a))
        return result
    if isinstance(e, Sub):
        return _padd(to_poly(e.left), to_poly(e.right), Fraction(-1))
    if isinstance(e, Neg):
        return _pscale(to_poly(e.child), Fraction(-1))
    if isinstance(e, Mul):
        return _product([to_poly(a) for a in e.args])
    if isinstance(e, Div):
        return _quotient(to_poly(e.num), to_poly(e.den))
    if isinstance(e, PowInt):
        return _power(to_poly(e.base), e.exp, e)
    if isinstance(e, Func):
        child = from_poly(to_poly(e.child))
        folded = func(e.name, child)
        if isinstance(folded, Const):
            return {(): Fraction(folded.value)} if folded.value else {}
        return {((folded, 1),): Fraction(1)}
    raise TypeError(f"unknown node {type(e).__name__}")


def _product(polys: List[Poly]) -> Poly:
    if any(not p for p in polys):
        return {}
    coef = Fraction(1)
    singles: List[Poly] = []
    sums: List[Poly] = []
    for p in polys:
        if len(p) > 1:
            sums.append(p)
        elif () in p:
            coef *= p[()]
        else:
            singles.append(p)
    # a lone sum times constants is distributed; anything else keeps sums as units
    if len(sums) == 1 and not singles:
        return _pscale(sums[0], coef)
    result: Poly = {(): coef}
    for p in singles:
        result = _pmul(result, p)
    for p in sums:
        result = _pmul(result, _atomize(p))
    return result


def _invert(p: Poly) -> Poly:
    m, c = _single(p if len(p) == 1 else _atomize(p))
    factor, inverse = _mono_pow(m, -1)
    return {inverse: factor / c}


def _quotient(num: Poly, den: Poly) -> Poly:
    if not num:
        return {}
    if not den:
        opaque = Div(from_poly(num), ZERO)
        return {((opaque, 1),): Fraction(1)}
    return _pmul(num, _invert(den))


def _power(p: Poly, k: int, original: PowInt) -> Poly:
    if k == 0:
        return {(): Fraction(1)}
    if not p:
        if k > 0:
            return {}
        return {((original, 1),): Fraction(1)}
    m, c = _single(p if len(p) == 1 else _atomize(p))
    factor, mk = _mono_pow(m, k)
    return {mk: (c ** k) * factor}


# ---------------------------------------------------------------------------
# writing an expression

def _coef_parts(c: Fraction) -> Tuple[float, int]:
    """c as (binary-exact numerator, odd integer denominator)."""
    den = c.denominator
    two = den & -den
    odd = den // two
    if odd == 1 or odd > 2 ** 53:
        return float(c), 1
    return float(Fraction(c.numerator, two)), odd


def _render_term(m: Mono, c: Fraction) -> Expr:
    value, odd = _coef_parts(c)
    nums = [pow_int(a, k) for a, k in m if k > 0]
    dens = [pow_int(a, -k) for a, k in m if k < 0]
    body = mul(Const(value), *nums)
    if odd != 1:
        dens.insert(0, Const(odd))
    if dens:
        return div(body, mul(*dens))
    return body


def _attach(head: Expr, inner: Expr) -> Expr:
    if isinstance(head, Div):
        return div(mul(head.num, inner), head.den)
    return mul(head, inner)


def _factor_group(members: List[Tuple[Mono, Fraction]]) -> Optional[Part]:
    content, shared = _common(members)
    if not shared:
        return None
    residual: Poly = {}
    for m, c in members:
        rest = _mono_div(m, shared)
        if len(rest) == 1 and rest[0][1] == 1 and _is_sum_atom(rest[0][0]):
            residual = _padd(residual, to_poly(rest[0][0]), c / content)
        else:
            residual = _padd(residual, {rest: c / content})
    # signs stay inside the factored sum
    inner = from_poly(residual)
    return _mono_key(members[0][0]), False, _attach(_render_term(shared, content), inner)


def _join(parts: List[Part]) -> Expr:
    acc: Optional[Expr] = None
    for _, negative, e in parts:
        if is_const(e, 0.0):
            continue
        if acc is None:
            acc = neg(e) if negative else e
        elif negative:
            acc = Sub(acc, e)
        elif isinstance(acc, Add):
            acc = Add(acc.args + (e,))
        else:
            acc = Add((acc, e))
    return ZERO if acc is None else acc


def from_poly(p: Poly) -> Expr:
    items = sorted(((m, c) for m, c in p.items() if c), key=lambda mc: _mono_key(mc[0]))
    if not items:
        return ZERO
    if len(items) == 1:
        m, c = items[0]
        term = _render_term(m, abs(c))
        return neg(term) if c < 0 else term
    groups: Dict[tuple, List[Tuple[Mono, Fraction]]] = {}
    for m, c in items:
        denominator = tuple(sorted(canonical_key(a) for a, k in m if k < 0))
        groups.setdefault(denominator, []).append((m, c))
    parts: List[Part] = []
    for denominator, members in groups.items():
        part = None
        if len(members) >= 2 and (denominator or all(m for m, _ in members)):
            part = _factor_group(members)
        if part is not None:
            parts.append(part)
        else:
            parts.extend((_mono_key(m), c < 0, _render_term(m, abs(c))) for m, c in members)
    parts.sort(key=lambda part: part[0])
    return _join(parts)


def simplify(e: Expr) -> Expr:
    """Equivalent expression, iterated to a fixed point under a size guard."""
    current = e
    for _ in range(MAX_ROUNDS):
        candidate = from_poly(to_poly(current))
        if candidate == current or node_count(candidate) > node_count(current):
            break
        current = candidate
    return current

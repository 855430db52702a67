"""Infix expression parser and printer.

# expression → term ( ( "+" | "-" ) term )* ;
# term       → unary ( ( "*" | "/" ) unary )* ;
# unary      → "-" unary | power ;
# power      → primary ( "^" exponent )? ;
# exponent   → ( "-" | "+" )? INTEGER ( "^" exponent )? | "(" exponent ")" ;
# primary    → NUMBER | VARIABLE | FUNCTION "(" expression ")" | "(" expression ")" ;

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  Exponents must
be integer literals; ``x^-k`` becomes ``1/x^k``.
"""

import re
from dataclasses import dataclass
from typing import List, Optional, Sequence

from ..errors import ParseError
from .expr import FUNCTIONS, Add, Const, Div, Expr, Func, Mul, Neg, PowInt, Sub, Var

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

# largest |k| accepted in u^k
MAX_EXPONENT = 1000


@dataclass(frozen=True)
class Token:
    type: str
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind if kind != "op" else m.group(), m.group(), pos))
        pos = m.end()
    tokens.append(Token("EOF", "", len(text)))
    return tokens


class Parser:
    def __init__(self, text: str, var_names: Sequence[str]):
        self.text = text
        self.tokens = tokenize(text)
        self.current_token = 0
        self.var_index = {name: i for i, name in enumerate(var_names)}

    def next(self) -> Token:
        return self.tokens[self.current_token]

    def advance(self) -> Token:
        token = self.tokens[self.current_token]
        if token.type != "EOF":
            self.current_token += 1
        return token

    def check(self, types) -> bool:
        return self.next().type in types

    def match(self, types) -> Optional[Token]:
        if self.check(types):
            return self.advance()
        return None

    def expect(self, kind: str, what: str) -> Token:
        if not self.check((kind,)):
            self.fail(f"expected {what}")
        return self.advance()

    def fail(self, message: str):
        token = self.next()
        found = "end of input" if token.type == "EOF" else repr(token.text)
        raise ParseError(f"{message}, found {found}", token.pos)

    def parse(self) -> Expr:
        result = self.expression()
        if not self.check(("EOF",)):
            self.fail("unexpected token (implicit multiplication is not allowed)")
        return result

    def expression(self) -> Expr:
        left = self.term()
        while True:
            op = self.match(("+", "-"))
            if op is None:
                return left
            right = self.term()
            if op.type == "-":
                left = Sub(left, right)
            elif isinstance(left, Add):
                left = Add(left.args + (right,))
            else:
                left = Add((left, right))

    def term(self) -> Expr:
        left = self.unary()
        while True:
            op = self.match(("*", "/"))
            if op is None:
                return left
            right = self.unary()
            if op.type == "/":
                left = Div(left, right)
            elif isinstance(left, Mul):
                left = Mul(left.args + (right,))
            else:
                left = Mul((left, right))

    def unary(self) -> Expr:
        if self.match(("-",)):
            child = self.unary()
            if isinstance(child, Const):
                return Const(-child.value)
            return Neg(child)
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if not self.match(("^",)):
            return base
        k = self.exponent()
        if k < 0:
            return Div(Const(1.0), PowInt(base, -k))
        return PowInt(base, k)

    def exponent(self) -> int:
        start = self.next().pos
        if self.match(("(",)):
            k = self.exponent()
            self.expect(")", "')' closing the exponent")
        else:
            sign = -1 if self.match(("-",)) else 1
            if sign == 1:
                self.match(("+",))
            token = self.next()
            if token.type != "number":
                self.fail("expected an integer exponent")
            if not token.text.isdigit():
                raise ParseError(f"non-integer exponent {token.text!r}", token.pos)
            if len(token.text.lstrip("0")) > len(str(MAX_EXPONENT)):
                raise ParseError(f"exponent exceeds {MAX_EXPONENT}", token.pos)
            self.advance()
            k = sign * int(token.text)
        self._check_exponent(k, start)
        if self.match(("^",)):
            inner = self.exponent()
            if inner < 0:
                raise ParseError("negative exponent of an exponent", self.next().pos)
            k = k ** inner
            self._check_exponent(k, start)
        return k

    @staticmethod
    def _check_exponent(k: int, pos: int):
        if abs(k) > MAX_EXPONENT:
            raise ParseError(f"exponent exceeds {MAX_EXPONENT}", pos)

    def primary(self) -> Expr:
        token = self.next()
        if token.type == "number":
            self.advance()
            return Const(float(token.text))
        if token.type == "name":
            self.advance()
            if token.text in self.var_index:
                return Var(self.var_index[token.text])
            if token.text in FUNCTIONS:
                self.expect("(", f"'(' after function {token.text}")
                arg = self.expression()
                self.expect(")", "')' closing the function argument")
                return Func(token.text, arg)
            raise ParseError(f"unknown identifier {token.text!r}", token.pos)
        if self.match(("(",)):
            inner = self.expression()
            self.expect(")", "')'")
            return inner
        self.fail("expected a number, variable, function or '('")


def parse(text: str, var_names: Sequence[str]) -> Expr:
    """Parse infix text into an Expr over the given ordered variable names."""
    return Parser(text, var_names).parse()


# ---------------------------------------------------------------------------
# printer

_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = 1, 2, 3, 4, 5


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _precedence(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _SUM
    if isinstance(e, (Mul, Div)):
        return _PRODUCT
    if isinstance(e, Neg) or (isinstance(e, Const) and (e.value < 0 or str(e.value).startswith("-"))):
        return _UNARY
    if isinstance(e, PowInt):
        return _POWER
    return _ATOM


def format_expr(e: Expr, var_names: Optional[Sequence[str]] = None) -> str:
    """Parseable text for e; variables default to x1, x2, ..."""

    def name(i: int) -> str:
        if var_names is not None and i < len(var_names):
            return var_names[i]
        return f"x{i + 1}"

    def fmt(node: Expr, min_prec: int) -> str:
        text = emit(node)
        return f"({text})" if _precedence(node) < min_prec else text

    def emit(node: Expr) -> str:
        if isinstance(node, Const):
            return format_number(node.value)
        if isinstance(node, Var):
            return name(node.index)
        if isinstance(node, Add):
            head = fmt(node.args[0], _SUM if not isinstance(node.args[0], Add) else _PRODUCT)
            return "+".join([head] + [fmt(a, _PRODUCT) for a in node.args[1:]])
        if isinstance(node, Sub):
            return f"{fmt(node.left, _SUM)}-{fmt(node.right, _PRODUCT)}"
        if isinstance(node, Mul):
            head = fmt(node.args[0], _PRODUCT if not isinstance(node.args[0], Mul) else _UNARY)
            return "*".join([head] + [fmt(a, _UNARY) for a in node.args[1:]])
        if isinstance(node, Div):
            return f"{fmt(node.num, _PRODUCT)}/{fmt(node.den, _UNARY)}"
        if isinstance(node, Neg):
            return f"-{fmt(node.child, _UNARY)}"
        if isinstance(node, PowInt):
            return f"{fmt(node.base, _ATOM)}^{node.exp}"
        if isinstance(node, Func):
            return f"{node.name}({emit(node.child)})"
        raise TypeError(f"unknown node {type(node).__name__}")

    return emit(e)

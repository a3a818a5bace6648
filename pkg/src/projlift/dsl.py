"""Scalar expression DSL: parsing, evaluation and exact differentiation.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' integer)?
    base   := number | name | '(' expr ')' | func '(' expr ')'
    func   := exp | sin | cos | neg

Names match ``[A-Za-z][A-Za-z0-9_]*`` and must belong to the symbol table
declared at parse time.  Trees are immutable; the arithmetic helpers below
apply constant folding only, never rewriting that could change evaluation.
All arithmetic is IEEE double precision.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

Number = Union[int, float]


class DslError(ValueError):
    """Base class for expression-language errors."""


class ParseError(DslError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UndeclaredSymbolError(ParseError):
    def __init__(self, name: str, position: int):
        super().__init__(f"undeclared symbol {name!r}", position)
        self.name = name


class DomainError(ArithmeticError):
    """Evaluation left the domain (division by zero, overflow, NaN)."""


class Expr:
    """Immutable expression tree node."""

    __slots__ = ()

    def eval(self, binding: Mapping[str, float]) -> float:
        return evaluate(self, binding)

    def diff(self, name: str) -> "Expr":
        return diff(self, name)

    def subs(self, mapping: Mapping[str, "Expr"]) -> "Expr":
        return subst(self, mapping)

    def free_symbols(self) -> frozenset:
        return free_symbols(self)

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

    def __pow__(self, exponent: int):
        return powi(self, exponent)

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: float


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Div(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Func(Expr):
    fn: str
    arg: Expr


FUNCTIONS: dict[str, Callable[[float], float]] = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
}

ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return Const(float(value))
    raise TypeError(f"cannot coerce {value!r} to Expr")


def const(value: Number) -> Const:
    return Const(float(value))


def var(name: str) -> Var:
    return Var(name)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if isinstance(a, Const) and a.value == 0.0:
        return b
    if isinstance(b, Const) and b.value == 0.0:
        return a
    return Add(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if isinstance(a, Const):
        if a.value == 0.0:
            return ZERO
        if a.value == 1.0:
            return b
    if isinstance(b, Const):
        if b.value == 0.0:
            return ZERO
        if b.value == 1.0:
            return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const):
        if b.value == 1.0:
            return a
        if b.value != 0.0 and isinstance(a, Const):
            return Const(a.value / b.value)
    return Div(a, b)


def powi(a: Expr, exponent: int) -> Expr:
    exponent = int(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return a
    if isinstance(a, Const) and (a.value != 0.0 or exponent > 0):
        return Const(a.value ** exponent)
    return Pow(a, exponent)


def func(fn: str, arg: Expr) -> Expr:
    if fn == "neg":
        return neg(arg)
    if fn not in FUNCTIONS:
        raise DslError(f"unknown function {fn!r}")
    if isinstance(arg, Const):
        return Const(FUNCTIONS[fn](arg.value))
    return Func(fn, arg)


def evaluate(e: Expr, binding: Mapping[str, float]) -> float:
    value = _eval(e, binding)
    if not math.isfinite(value):
        raise DomainError(f"non-finite value {value!r}")
    return value


def _eval(e: Expr, binding: Mapping[str, float]) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return binding[e.name]
        except KeyError:
            raise DslError(f"unbound symbol {e.name!r}") from None
    if isinstance(e, Add):
        return _eval(e.left, binding) + _eval(e.right, binding)
    if isinstance(e, Mul):
        return _eval(e.left, binding) * _eval(e.right, binding)
    if isinstance(e, Div):
        den = _eval(e.den, binding)
        if den == 0.0:
            raise DomainError("division by zero")
        return _eval(e.num, binding) / den
    if isinstance(e, Pow):
        base = _eval(e.base, binding)
        if base == 0.0 and e.exponent < 0:
            raise DomainError("zero raised to a negative power")
        try:
            return base ** e.exponent
        except OverflowError:
            raise DomainError("overflow in power") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, binding)
    if isinstance(e, Func):
        try:
            return FUNCTIONS[e.fn](_eval(e.arg, binding))
        except OverflowError:
            raise DomainError(f"overflow in {e.fn}") from None
    raise TypeError(f"not an Expr: {e!r}")


def diff(e: Expr, name: str) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Add):
        return add(diff(e.left, name), diff(e.right, name))
    if isinstance(e, Mul):
        return add(mul(diff(e.left, name), e.right), mul(e.left, diff(e.right, name)))
    if isinstance(e, Div):
        num = sub(mul(diff(e.num, name), e.den), mul(e.num, diff(e.den, name)))
        return div(num, powi(e.den, 2))
    if isinstance(e, Pow):
        inner = mul(const(e.exponent), powi(e.base, e.exponent - 1))
        return mul(inner, diff(e.base, name))
    if isinstance(e, Neg):
        return neg(diff(e.arg, name))
    if isinstance(e, Func):
        d_arg = diff(e.arg, name)
        if e.fn == "exp":
            return mul(e, d_arg)
        if e.fn == "sin":
            return mul(func("cos", e.arg), d_arg)
        if e.fn == "cos":
            return neg(mul(func("sin", e.arg), d_arg))
    raise TypeError(f"not an Expr: {e!r}")


def subst(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Add):
        return add(subst(e.left, mapping), subst(e.right, mapping))
    if isinstance(e, Mul):
        return mul(subst(e.left, mapping), subst(e.right, mapping))
    if isinstance(e, Div):
        return div(subst(e.num, mapping), subst(e.den, mapping))
    if isinstance(e, Pow):
        return powi(subst(e.base, mapping), e.exponent)
    if isinstance(e, Neg):
        return neg(subst(e.arg, mapping))
    if isinstance(e, Func):
        return func(e.fn, subst(e.arg, mapping))
    raise TypeError(f"not an Expr: {e!r}")


def free_symbols(e: Expr) -> frozenset:
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Add):
        return free_symbols(e.left) | free_symbols(e.right)
    if isinstance(e, Mul):
        return free_symbols(e.left) | free_symbols(e.right)
    if isinstance(e, Div):
        return free_symbols(e.num) | free_symbols(e.den)
    if isinstance(e, Pow):
        return free_symbols(e.base)
    if isinstance(e, (Neg, Func)):
        return free_symbols(e.arg)
    raise TypeError(f"not an Expr: {e!r}")


def to_text(e: Expr) -> str:
    """Render in a form ``parse`` accepts (negative constants become neg(...))."""
    if isinstance(e, Const):
        if e.value < 0:
            return f"neg({_fmt(-e.value)})"
        return _fmt(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        if isinstance(e.right, Neg):
            return f"({to_text(e.left)} - {to_text(e.right.arg)})"
        return f"({to_text(e.left)} + {to_text(e.right)})"
    if isinstance(e, Mul):
        return f"({to_text(e.left)} * {to_text(e.right)})"
    if isinstance(e, Div):
        return f"({to_text(e.num)} / {to_text(e.den)})"
    if isinstance(e, Pow):
        return f"({to_text(e.base)})^{e.exponent}"
    if isinstance(e, Neg):
        return f"neg({to_text(e.arg)})"
    if isinstance(e, Func):
        return f"{e.fn}({to_text(e.arg)})"
    raise TypeError(f"not an Expr: {e!r}")


def _fmt(value: float) -> str:
    text = repr(value)
    return text[:-2] if text.endswith(".0") else text


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<sym>[-+*/^()]))"
)

_FUNC_NAMES = ("exp", "sin", "cos", "neg")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("sym", m.group("sym"), m.start("sym")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, symbols: frozenset):
        self.tokens = _tokenize(text)
        self.symbols = symbols
        self.index = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def advance(self) -> tuple[str, str, int]:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect_sym(self, symbol: str) -> None:
        kind, text, pos = self.peek()
        if kind != "sym" or text != symbol:
            raise ParseError(f"expected {symbol!r}", pos)
        self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "sym" and text in "+-":
                self.advance()
                rhs = self.term()
                e = add(e, rhs) if text == "+" else sub(e, rhs)
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "sym" and text in "*/":
                self.advance()
                rhs = self.factor()
                e = mul(e, rhs) if text == "*" else div(e, rhs)
            else:
                return e

    def factor(self) -> Expr:
        e = self.base()
        kind, text, _ = self.peek()
        if kind == "sym" and text == "^":
            self.advance()
            e = powi(e, self.integer())
        return e

    def integer(self) -> int:
        sign = 1
        kind, text, pos = self.peek()
        if kind == "sym" and text == "-":
            self.advance()
            sign = -1
            kind, text, pos = self.peek()
        if kind != "num" or any(c in text for c in ".eE"):
            raise ParseError("expected integer exponent", pos)
        self.advance()
        return sign * int(text)

    def base(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "num":
            return const(float(text))
        if kind == "name":
            next_kind, next_text, _ = self.peek()
            if next_kind == "sym" and next_text == "(":
                if text not in _FUNC_NAMES:
                    raise ParseError(f"unknown function {text!r}", pos)
                self.advance()
                arg = self.expr()
                self.expect_sym(")")
                return func(text, arg)
            if text not in self.symbols:
                raise UndeclaredSymbolError(text, pos)
            return var(text)
        if kind == "sym" and text == "(":
            e = self.expr()
            self.expect_sym(")")
            return e
        raise ParseError(f"unexpected {text!r}" if text else "unexpected end of input", pos)


def parse(text: str, symbols: Iterable[str]) -> Expr:
    """Parse ``text`` against the declared symbol table."""
    return _Parser(text, frozenset(symbols)).parse()

"""Arithmetic expressions in the single variable ``x``.

Grammar (``^`` binds tighter than unary minus and is right-associative)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-'? power
    power  := atom ('^' factor)?
    atom   := number | 'x' | fn '(' expr ')' | '(' expr ')'

Evaluation works on floats and on numpy arrays alike; any non-finite result
raises :class:`DomainError` naming the first offending ``x``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError, UnknownFunction, UnknownIdentifier

FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
}
_DIGITS = "0123456789"
BINARY_OPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


class Expr:
    """Base class of expression nodes."""

    def __call__(self, x):
        return eval_expression(self, x)

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Number(Expr):
    value: float


@dataclass(frozen=True)
class Variable(Expr):
    pass


@dataclass(frozen=True)
class Unary(Expr):
    child: Expr
    op: str = "-"


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


class _Parser:
    def __init__(self, src):
        self.src = src
        self.pos = 0  # 0-based; reported positions are 1-based

    def error(self, message, pos=None, cls=ParseError):
        pos = self.pos if pos is None else pos
        return cls(message, pos + 1, self.src)

    def skip(self):
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def expect(self, ch):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise self.error(f"expected '{ch}', found {found!r}")
        self.pos += 1

    def parse(self):
        if not self.src.strip():
            raise self.error("empty expression")
        node = self.expr()
        if self.peek():
            raise self.error(f"unexpected {self.peek()!r}, expected operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.src[self.pos]
            self.pos += 1
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.src[self.pos]
            self.pos += 1
            node = Binary(op, node, self.factor())
        return node

    def factor(self):
        if self.peek() == "-":
            self.pos += 1
            return Unary(self.power())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            return Binary("^", base, self.factor())
        return base

    def atom(self):
        ch = self.peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch and (ch in _DIGITS or ch == "."):
            return self.number()
        if (ch.isascii() and ch.isalpha()) or ch == "_":
            while self.pos < len(self.src) and (
                (self.src[self.pos].isascii() and self.src[self.pos].isalnum()) or self.src[self.pos] == "_"
            ):
                self.pos += 1
            name = self.src[start:self.pos]
            if self.peek() == "(":
                if name not in FUNCTIONS:
                    raise self.error(f"unknown function {name!r}", start, UnknownFunction)
                self.pos += 1
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name == "x":
                return Variable()
            raise self.error(f"unknown identifier {name!r}", start, UnknownIdentifier)
        found = ch or "end of input"
        raise self.error(f"expected number, 'x', function call or '(', found {found!r}")

    def number(self):
        start = self.pos
        src = self.src
        while self.pos < len(src) and src[self.pos] in _DIGITS:
            self.pos += 1
        if self.pos < len(src) and src[self.pos] == ".":
            self.pos += 1
            while self.pos < len(src) and src[self.pos] in _DIGITS:
                self.pos += 1
        if self.pos < len(src) and src[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(src) and src[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(src) and src[self.pos] in _DIGITS:
                while self.pos < len(src) and src[self.pos] in _DIGITS:
                    self.pos += 1
            else:
                self.pos = mark  # "2e" is the number 2 followed by an identifier
        text = src[start:self.pos]
        if text == ".":
            raise self.error("malformed number", start)
        return Number(float(text))


def parse_expression(src):
    """Parse ``src`` into an :class:`Expr` tree.

    Raises ParseError (or its subclasses UnknownFunction, UnknownIdentifier)
    carrying the 1-based position of the offending character; end of input is
    position ``len(src) + 1``.
    """
    if not isinstance(src, str):
        raise TypeError("expression source must be a string")
    parser = _Parser(src)
    try:
        return parser.parse()
    except RecursionError:
        raise parser.error("expression nested too deeply") from None


def _eval(node, x):
    if isinstance(node, Number):
        return np.full_like(x, node.value)
    if isinstance(node, Variable):
        return x
    if isinstance(node, Unary):
        return -_eval(node.child, x)
    if isinstance(node, Binary):
        return BINARY_OPS[node.op](_eval(node.left, x), _eval(node.right, x))
    if isinstance(node, Call):
        return FUNCTIONS[node.fn](_eval(node.arg, x))
    raise TypeError(f"not an expression node: {node!r}")


def eval_expression(e, x):
    """Evaluate ``e`` at ``x`` (float or array).

    Raises DomainError if any result is not a finite real (log or sqrt of a
    negative, division by zero, fractional power of a negative, overflow).
    """
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    with np.errstate(all="ignore"):
        out = _eval(e, xs)
    bad = ~np.isfinite(out)
    if bad.any():
        where = float(xs[np.flatnonzero(bad)[0]])
        raise DomainError(f"{to_source(e)} is not finite", where)
    return float(out[0]) if scalar else out


def to_source(e):
    """Fully parenthesized source text that parses back to the same tree."""
    if isinstance(e, Number):
        if e.value < 0 or not np.isfinite(e.value):
            raise ValueError("only finite nonnegative literals have a source form")
        return repr(float(e.value))
    if isinstance(e, Variable):
        return "x"
    if isinstance(e, Unary):
        return f"(-{to_source(e.child)})"
    if isinstance(e, Binary):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.fn}({to_source(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")

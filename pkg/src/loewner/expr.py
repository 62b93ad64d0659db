"""Field-definition expression language.

Grammar (whitespace insignificant, no implicit multiplication)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := number | "i" | "z" | "t" | ident "(" expr ")" | "(" expr ")"
    ident := "exp" | "log" | "sqrt" | "sin" | "cos"

``^`` binds tighter than a leading minus, so ``-z^2`` is ``-(z^2)``.  ``log``
and ``sqrt`` use principal branches.  Expressions compile to closures that
accept scalars or numpy arrays of complex values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import EvaluationError, ExprNameError, ExprSyntaxError

FUNCTIONS = ("exp", "log", "sqrt", "sin", "cos")
VARIABLES = ("z", "t")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    name: str  # "z" or "t"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


# -- parsing -----------------------------------------------------------------


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, arity):
        self.tokens = tokenize(text)
        self.i = 0
        self.arity = arity

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.take()
        if value != text:
            found = "end of input" if kind == "eof" else repr(value)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected token {value!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, value, pos = self.take()
        if kind == "number":
            return Num(complex(float(value)))
        if kind == "ident":
            if value == "i":
                return Num(1j)
            if value in VARIABLES:
                if value == "t" and self.arity == 1:
                    raise ExprNameError(
                        f"'t' used in a one-argument expression (position {pos})"
                    )
                return Var(value)
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            raise ExprNameError(f"unknown identifier {value!r} at position {pos}")
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "eof" else repr(value)
        raise ExprSyntaxError(f"unexpected {found}", pos)


# -- evaluation --------------------------------------------------------------


def _check_nonzero(x, what):
    if np.any(x == 0):
        raise EvaluationError(what)
    return x


def _upper_zero(x):
    # a signed -0 imaginary part would put the cut on the wrong side: arg is in (-pi, pi]
    x = np.asarray(x, dtype=complex)
    return x.real + 1j * (x.imag + 0.0)


def _principal_log(x):
    return np.log(_upper_zero(_check_nonzero(x, "log branch point hit (argument 0)")))


def _principal_sqrt(x):
    return np.sqrt(_upper_zero(_check_nonzero(x, "sqrt branch point hit (argument 0)")))


_CALLS = {
    "exp": np.exp,
    "log": _principal_log,
    "sqrt": _principal_sqrt,
    "sin": np.sin,
    "cos": np.cos,
}


def _integer_exponent(node):
    if isinstance(node, Num) and node.value.imag == 0 and node.value.real.is_integer():
        return int(node.value.real)
    if isinstance(node, Neg):
        k = _integer_exponent(node.arg)
        return None if k is None else -k
    return None


def _compile(node):
    """Turn an AST into a closure ``f(z, t)`` over complex numpy arrays."""
    if isinstance(node, Num):
        c = node.value
        return lambda z, t: c
    if isinstance(node, Var):
        if node.name == "z":
            return lambda z, t: z
        return lambda z, t: t
    if isinstance(node, Neg):
        a = _compile(node.arg)
        return lambda z, t: -a(z, t)
    if isinstance(node, Call):
        fn = _CALLS[node.name]
        a = _compile(node.arg)
        return lambda z, t: fn(np.asarray(a(z, t), dtype=complex))
    a = _compile(node.left)
    b = _compile(node.right)
    op = node.op
    if op == "+":
        return lambda z, t: a(z, t) + b(z, t)
    if op == "-":
        return lambda z, t: a(z, t) - b(z, t)
    if op == "*":
        return lambda z, t: a(z, t) * b(z, t)
    if op == "/":
        def div(z, t):
            return a(z, t) / _check_nonzero(b(z, t), "division by zero")
        return div
    k = _integer_exponent(node.right)
    if k is not None:
        if k >= 0:
            return lambda z, t: np.asarray(a(z, t), dtype=complex) ** k
        return lambda z, t: 1.0 / _check_nonzero(
            np.asarray(a(z, t), dtype=complex) ** (-k), "division by zero"
        )
    # general power: principal branch exp(b log a)
    return lambda z, t: np.exp(b(z, t) * _principal_log(np.asarray(a(z, t), dtype=complex)))


def substitute_t(node, value):
    """Replace every ``t`` with the literal ``value``."""
    if isinstance(node, Var):
        return Num(complex(value)) if node.name == "t" else node
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return Neg(substitute_t(node.arg, value))
    if isinstance(node, Call):
        return Call(node.name, substitute_t(node.arg, value))
    return BinOp(node.op, substitute_t(node.left, value), substitute_t(node.right, value))


def uses_t(node):
    if isinstance(node, Var):
        return node.name == "t"
    if isinstance(node, Num):
        return False
    if isinstance(node, (Neg, Call)):
        return uses_t(node.arg)
    return uses_t(node.left) or uses_t(node.right)


def literal(c):
    """Source text for a complex constant that parses back exactly."""
    c = complex(c)
    if c.imag == 0:
        return f"({c.real!r})"
    return f"({c.real!r}+({c.imag!r})*i)"


@dataclass(frozen=True)
class HoloFunction:
    """A parsed holomorphic expression of ``z`` (arity 1) or ``z, t`` (arity 2).

    Calling it evaluates the expression; scalar input gives a Python
    ``complex``, array input gives a complex array of the same shape.
    """

    source: str
    arity: int
    ast: Node
    _fn: Callable = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self._fn is None:
            object.__setattr__(self, "_fn", _compile(self.ast))

    def __call__(self, z, t=None):
        if self.arity == 2 and t is None:
            raise TypeError(f"{self.source!r} needs a time argument")
        if self.arity == 1 and t is not None:
            raise TypeError(f"{self.source!r} takes no time argument")
        scalar = np.ndim(z) == 0
        zz = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            out = self._fn(zz, t)
            out = np.broadcast_to(np.asarray(out, dtype=complex), zz.shape)
        if not np.all(np.isfinite(out)):
            raise EvaluationError(f"non-finite value evaluating {self.source!r}")
        return complex(out) if scalar else np.array(out)

    def freeze(self, t):
        """The one-argument function ``z -> f(z, t)``."""
        if self.arity == 1:
            return self
        t = float(t)
        return HoloFunction(f"[{self.source}]@t={t!r}", 1, substitute_t(self.ast, t))


def parse_expr(text, arity=1):
    if arity not in (1, 2):
        raise ValueError("arity must be 1 or 2")
    return HoloFunction(text, arity, _Parser(text, arity).parse())


def parse_time_function(text):
    """Parse an expression of ``t`` alone (time factors, time changes).

    Returns a callable ``g(t)`` accepting real scalars or arrays.
    """
    node = _Parser(text, 2).parse()
    if _uses_z(node):
        raise ExprNameError(f"time function {text!r} must not use 'z'")
    fn = _compile(node)

    def g(t):
        scalar = np.ndim(t) == 0
        tt = np.asarray(t, dtype=complex)
        with np.errstate(all="ignore"):
            out = np.broadcast_to(np.asarray(fn(tt * 0, tt), dtype=complex), tt.shape)
        if not np.all(np.isfinite(out)):
            raise EvaluationError(f"non-finite value evaluating {text!r}")
        return complex(out) if scalar else np.array(out)

    g.source = text
    return g


def _uses_z(node):
    if isinstance(node, Var):
        return node.name == "z"
    if isinstance(node, Num):
        return False
    if isinstance(node, (Neg, Call)):
        return _uses_z(node.arg)
    return _uses_z(node.left) or _uses_z(node.right)

"""Expression trees: parsing, printing, analytic differentiation, evaluation.

Grammar (``^`` and ``**`` both mean power, right-associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary (('^' | '**') unary)?
    primary := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

``x`` is the spatial variable; every other bare name is a parameter.
Function names: exp, log, sqrt, sin, cos, tan, cot, sec, csc, tanh, coth,
sech, csch, arctan (aliases: ln, atan, cosech).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

__all__ = [
    "Expression", "Const", "Param", "Var", "Neg", "Add", "Sub", "Mul", "Div",
    "Pow", "Func", "X", "FUNCTIONS",
    "ExpressionSyntaxError", "UnknownFunctionError", "DomainError",
    "UnboundParameterError",
    "parse", "to_text", "differentiate", "evaluate", "free_parameters",
    "substitute", "const", "neg", "add", "sub", "mul", "div", "power", "func",
    "parse_binding",
]


class ExpressionSyntaxError(ValueError):
    """Malformed expression text; ``position`` is the 0-based offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownFunctionError(ExpressionSyntaxError):
    pass


class DomainError(ArithmeticError):
    """Evaluation hit a pole, a branch cut, or overflowed.

    ``where`` holds the offending x value when evaluating on a grid.
    """

    def __init__(self, message, where=None):
        if where is not None:
            message = f"{message} at x = {where!r}"
        super().__init__(message)
        self.where = where


class UnboundParameterError(KeyError):
    pass


# ---------------------------------------------------------------------------
# nodes


class Expression:
    """Base class for immutable expression nodes."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)

    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __truediv__(self, other):
        return div(self, _wrap(other))

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __pow__(self, other):
        return power(self, _wrap(other))

    def __neg__(self):
        return neg(self)


@dataclass(frozen=True, eq=True)
class Const(Expression):
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite constant {self.value!r}")
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True, eq=True)
class Param(Expression):
    name: str


@dataclass(frozen=True, eq=True)
class Var(Expression):
    """The spatial variable x."""


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True, eq=True)
class Add(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Sub(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Mul(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Div(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Pow(Expression):
    base: Expression
    exponent: Expression


@dataclass(frozen=True, eq=True)
class Func(Expression):
    name: str
    arg: Expression

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise UnknownFunctionError(f"unknown function {self.name!r}", 0)


X = Var()
ZERO = Const(0.0)
ONE = Const(1.0)

FUNCTIONS = (
    "exp", "log", "sqrt", "sin", "cos", "tan", "cot", "sec", "csc",
    "tanh", "coth", "sech", "csch", "arctan",
)
_ALIASES = {"ln": "log", "atan": "arctan", "cosech": "csch"}
RESERVED = frozenset(FUNCTIONS) | frozenset(_ALIASES) | {"x"}

Number = Union[float, int]


def _wrap(value):
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, float)):
        return Const(value)
    return NotImplemented


# ---------------------------------------------------------------------------
# folding constructors (constant folding and trivial-identity pruning only)


def _is(e, v):
    return isinstance(e, Const) and e.value == v


def const(value: Number) -> Const:
    return Const(value)


def neg(e):
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Neg):
        return e.arg
    return Neg(e)


def add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return Add(a, b)


def sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if _is(a, -1.0):
        return neg(b)
    if _is(b, -1.0):
        return neg(a)
    return Mul(a, b)


def div(a, b):
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    if _is(b, 1.0):
        return a
    if _is(a, 0.0) and not _is(b, 0.0):
        return ZERO
    return Div(a, b)


def power(a, b):
    if _is(b, 1.0):
        return a
    if _is(b, 0.0):
        return ONE
    if isinstance(a, Const) and isinstance(b, Const):
        try:
            v = a.value ** b.value
        except (OverflowError, ZeroDivisionError):
            return Pow(a, b)
        if isinstance(v, float) and math.isfinite(v):
            return Const(v)
    return Pow(a, b)


def func(name, arg):
    return Func(_ALIASES.get(name, name), arg)


# ---------------------------------------------------------------------------
# printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def _prec(e):
    return _PREC.get(type(e), 5)


def to_text(e: Expression) -> str:
    """Render ``e`` in the parser grammar; ``parse(to_text(e)) == e``."""
    if isinstance(e, Const):
        v = e.value
        text = str(int(v)) if v.is_integer() and abs(v) < 1e15 and str(v) != "-0.0" else repr(v)
        return f"({text})" if text.startswith("-") else text
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        # a bare literal after '-' would be folded into a negative constant
        if isinstance(e.arg, Const) or _prec(e.arg) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        left = to_text(e.base)
        right = to_text(e.exponent)
        if _prec(e.base) <= 4:
            left = f"({left})"
        if _prec(e.exponent) < 3:
            right = f"({right})"
        return f"{left} ^ {right}"
    p = _PREC[type(e)]
    left = to_text(e.left)
    right = to_text(e.right)
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {_SYMBOL[type(e)]} {right}"


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            nxt, after = self.peek(), self.peek(1)
            if nxt[0] == "num" and after[1] not in ("^", "**"):
                self.take()
                return Const(-float(nxt[1]))
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[1] in ("^", "**"):
            self.take()
            return Pow(base, self.unary())
        return base

    def primary(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if self.peek()[1] == "(":
                name = _ALIASES.get(text, text)
                if name not in FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {text!r}", pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(name, arg)
            if text in FUNCTIONS or text in _ALIASES:
                raise ExpressionSyntaxError(f"function {text!r} needs an argument", pos)
            return X if text == "x" else Param(text)
        if text == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"unexpected {found}", pos)


def parse(text: str) -> Expression:
    """Parse ``text`` into an expression tree (no simplification)."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# structure queries


def free_parameters(e: Expression) -> frozenset:
    if isinstance(e, Param):
        return frozenset((e.name,))
    if isinstance(e, (Const, Var)):
        return frozenset()
    return frozenset().union(*(free_parameters(c) for c in _children(e)))


def _children(e):
    if isinstance(e, (Neg, Func)):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base, e.exponent)
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.left, e.right)
    return ()


def _depends(e, wrt):
    if wrt == "x":
        return _has_var(e)
    return wrt in free_parameters(e)


def _has_var(e):
    if isinstance(e, Var):
        return True
    return any(_has_var(c) for c in _children(e))


def substitute(e: Expression, values: Mapping[str, Union[Number, Expression]]) -> Expression:
    """Replace parameters by constants or sub-expressions, folding as it goes."""
    if isinstance(e, Param):
        if e.name in values:
            return _wrap(values[e.name])
        return e
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Neg):
        return neg(substitute(e.arg, values))
    if isinstance(e, Func):
        return Func(e.name, substitute(e.arg, values))
    if isinstance(e, Pow):
        return power(substitute(e.base, values), substitute(e.exponent, values))
    ctor = {Add: add, Sub: sub, Mul: mul, Div: div}[type(e)]
    return ctor(substitute(e.left, values), substitute(e.right, values))


# ---------------------------------------------------------------------------
# differentiation


def differentiate(e: Expression, wrt: str = "x") -> Expression:
    """Analytic derivative of ``e`` with respect to ``x`` or a parameter name.

    Returns ``Const(0.0)`` when ``wrt`` does not occur in ``e``.
    """
    if not _depends(e, wrt):
        return ZERO
    return _d(e, wrt)


def _d(e, wrt):
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if wrt == "x" else ZERO
    if isinstance(e, Param):
        return ONE if e.name == wrt else ZERO
    if not _depends(e, wrt):
        return ZERO
    if isinstance(e, Neg):
        return neg(_d(e.arg, wrt))
    if isinstance(e, Add):
        return add(_d(e.left, wrt), _d(e.right, wrt))
    if isinstance(e, Sub):
        return sub(_d(e.left, wrt), _d(e.right, wrt))
    if isinstance(e, Mul):
        return add(mul(_d(e.left, wrt), e.right), mul(e.left, _d(e.right, wrt)))
    if isinstance(e, Div):
        u, v = e.left, e.right
        du, dv = _d(u, wrt), _d(v, wrt)
        if _is(dv, 0.0):
            return div(du, v)
        return div(sub(mul(du, v), mul(u, dv)), power(v, Const(2.0)))
    if isinstance(e, Pow):
        u, p = e.base, e.exponent
        du = _d(u, wrt)
        if not _depends(p, wrt):
            return mul(mul(p, power(u, sub(p, ONE))), du)
        dp = _d(p, wrt)
        return mul(e, add(mul(dp, Func("log", u)), div(mul(p, du), u)))
    if isinstance(e, Func):
        return mul(_dfunc(e.name, e.arg), _d(e.arg, wrt))
    raise TypeError(f"not an expression node: {e!r}")


def _dfunc(name, u):
    two = Const(2.0)
    if name == "exp":
        return Func("exp", u)
    if name == "log":
        return div(ONE, u)
    if name == "sqrt":
        return div(ONE, mul(two, Func("sqrt", u)))
    if name == "sin":
        return Func("cos", u)
    if name == "cos":
        return neg(Func("sin", u))
    if name == "tan":
        return power(Func("sec", u), two)
    if name == "cot":
        return neg(power(Func("csc", u), two))
    if name == "sec":
        return mul(Func("sec", u), Func("tan", u))
    if name == "csc":
        return neg(mul(Func("csc", u), Func("cot", u)))
    if name == "tanh":
        return power(Func("sech", u), two)
    if name == "coth":
        return neg(power(Func("csch", u), two))
    if name == "sech":
        return neg(mul(Func("sech", u), Func("tanh", u)))
    if name == "csch":
        return neg(mul(Func("csch", u), Func("coth", u)))
    if name == "arctan":
        return div(ONE, add(ONE, power(u, two)))
    raise UnknownFunctionError(f"unknown function {name!r}", 0)


# ---------------------------------------------------------------------------
# evaluation

_EPS = np.finfo(float).eps


def evaluate(e: Expression, x=0.0, params: Mapping[str, object] | None = None):
    """Evaluate ``e`` at ``x`` with every free parameter bound in ``params``.

    ``x`` and parameter values may be floats or numpy arrays (broadcast
    together).  Scalar inputs give a Python float.  Poles, branch cuts and
    overflow raise :class:`DomainError`; NaN is never returned.
    """
    params = {} if params is None else params
    missing = free_parameters(e) - set(params)
    if missing:
        raise UnboundParameterError(f"unbound parameters: {', '.join(sorted(missing))}")
    scalar = np.ndim(x) == 0 and all(np.ndim(v) == 0 for v in params.values())
    xv = np.asarray(x, dtype=float)
    env = {k: np.asarray(v, dtype=float) for k, v in params.items()}
    with np.errstate(all="ignore"):
        out = _eval(e, xv, env)
    out = np.broadcast_to(out, np.broadcast_shapes(np.shape(out), xv.shape))
    bad = ~np.isfinite(out)
    if bad.any():
        raise DomainError("non-finite result (overflow)", _where(xv, bad))
    return float(out) if scalar else np.array(out, dtype=float)


def _where(xv, mask):
    if xv.ndim == 0:
        return float(xv)
    mask = np.broadcast_to(mask, np.broadcast_shapes(mask.shape, xv.shape))
    xs = np.broadcast_to(xv, mask.shape)[mask]
    return float(xs.flat[0]) if xs.size else None


def _check(xv, mask, message):
    if np.any(mask):
        raise DomainError(message, _where(xv, np.asarray(mask)))


def _near_zero(v, u):
    return np.abs(v) <= 4 * _EPS * np.maximum(1.0, np.abs(u))


def _eval(e, xv, env):
    if isinstance(e, Const):
        return np.float64(e.value)
    if isinstance(e, Var):
        return xv
    if isinstance(e, Param):
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval(e.arg, xv, env)
    if isinstance(e, Add):
        return _eval(e.left, xv, env) + _eval(e.right, xv, env)
    if isinstance(e, Sub):
        return _eval(e.left, xv, env) - _eval(e.right, xv, env)
    if isinstance(e, Mul):
        return _eval(e.left, xv, env) * _eval(e.right, xv, env)
    if isinstance(e, Div):
        num = _eval(e.left, xv, env)
        den = _eval(e.right, xv, env)
        _check(xv, den == 0, "division by zero")
        return num / den
    if isinstance(e, Pow):
        b = _eval(e.base, xv, env)
        p = _eval(e.exponent, xv, env)
        integral = np.equal(np.floor(p), p)
        _check(xv, (b < 0) & ~integral, "negative base with non-integer exponent")
        _check(xv, (b == 0) & (p < 0), "zero raised to a negative power")
        return np.power(b, p)
    if isinstance(e, Func):
        return _eval_func(e.name, _eval(e.arg, xv, env), xv)
    raise TypeError(f"not an expression node: {e!r}")


def _eval_func(name, u, xv):
    if name == "exp":
        return np.exp(u)
    if name == "log":
        _check(xv, u <= 0, "log of non-positive argument")
        return np.log(u)
    if name == "sqrt":
        _check(xv, u < 0, "sqrt of negative argument")
        return np.sqrt(u)
    if name == "sin":
        return np.sin(u)
    if name == "cos":
        return np.cos(u)
    if name == "arctan":
        return np.arctan(u)
    if name == "tanh":
        return np.tanh(u)
    if name == "sech":
        return 1.0 / np.cosh(u)
    if name in ("tan", "sec"):
        c = np.cos(u)
        _check(xv, _near_zero(c, u), f"pole of {name}")
        return np.sin(u) / c if name == "tan" else 1.0 / c
    if name in ("cot", "csc"):
        s = np.sin(u)
        _check(xv, _near_zero(s, u), f"pole of {name}")
        return np.cos(u) / s if name == "cot" else 1.0 / s
    if name in ("coth", "csch"):
        _check(xv, u == 0, f"pole of {name}")
        return 1.0 / np.tanh(u) if name == "coth" else 1.0 / np.sinh(u)
    raise UnknownFunctionError(f"unknown function {name!r}", 0)


# ---------------------------------------------------------------------------
# parameter bindings


def parse_binding(items) -> dict:
    """Turn ``["name=value", ...]`` into a dict, rejecting duplicates.

    Names must be identifiers other than ``x`` and the function names.
    """
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep:
            raise ValueError(f"expected name=value, got {item!r}")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) or name in RESERVED:
            raise ValueError(f"invalid parameter name {name!r}")
        if name in out:
            raise ValueError(f"duplicate parameter {name!r}")
        out[name] = float(value)
    return out

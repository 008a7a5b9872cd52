"""Curve expression language: parser, AST, pretty-printer and order-3 Taylor jets.

Grammar::

    expr    := term { ("+"|"-") term }
    term    := factor { ("*"|"/") factor }
    factor  := unary [ "^" factor ]
    unary   := "-" unary | primary
    primary := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

Evaluation carries value and the first three derivatives with respect to the
parameter, which is what curvature and torsion need.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

from .errors import BindingError, DomainError, ExpressionSyntaxError
from .numerics import adaptive_simpson

# ---------------------------------------------------------------------------
# Jets
# ---------------------------------------------------------------------------


class Jet3:
    """Truncated Taylor jet ``(f, f', f'', f''')`` in one variable."""

    __slots__ = ("f", "d1", "d2", "d3")

    def __init__(self, f, d1=0.0, d2=0.0, d3=0.0):
        self.f = f
        self.d1 = d1
        self.d2 = d2
        self.d3 = d3

    @classmethod
    def variable(cls, t):
        return cls(float(t), 1.0, 0.0, 0.0)

    def __iter__(self):
        yield self.f
        yield self.d1
        yield self.d2
        yield self.d3

    def __eq__(self, other):
        if isinstance(other, Jet3):
            return tuple(self) == tuple(other)
        return NotImplemented

    def __repr__(self):
        return f"Jet3({self.f!r}, {self.d1!r}, {self.d2!r}, {self.d3!r})"

    def __neg__(self):
        return Jet3(-self.f, -self.d1, -self.d2, -self.d3)

    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.f + other.f, self.d1 + other.d1, self.d2 + other.d2, self.d3 + other.d3)
        return Jet3(self.f + other, self.d1, self.d2, self.d3)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.f - other.f, self.d1 - other.d1, self.d2 - other.d2, self.d3 - other.d3)
        return Jet3(self.f - other, self.d1, self.d2, self.d3)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            return Jet3(self.f * other, self.d1 * other, self.d2 * other, self.d3 * other)
        a0, a1, a2, a3 = self.f, self.d1, self.d2, self.d3
        b0, b1, b2, b3 = other.f, other.d1, other.d2, other.d3
        return Jet3(
            a0 * b0,
            a1 * b0 + a0 * b1,
            a2 * b0 + 2.0 * a1 * b1 + a0 * b2,
            a3 * b0 + 3.0 * a2 * b1 + 3.0 * a1 * b2 + a0 * b3,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet3):
            if other == 0:
                raise DomainError("division by zero")
            return Jet3(self.f / other, self.d1 / other, self.d2 / other, self.d3 / other)
        return self * other.recip()

    def __rtruediv__(self, other):
        return self.recip() * other

    def compose(self, g0, g1, g2, g3):
        """Apply an outer function whose derivatives at ``self.f`` are ``g0..g3`` (Faa di Bruno)."""
        u1, u2, u3 = self.d1, self.d2, self.d3
        return Jet3(
            g0,
            g1 * u1,
            g2 * u1 * u1 + g1 * u2,
            g3 * u1 * u1 * u1 + 3.0 * g2 * u1 * u2 + g1 * u3,
        )

    def recip(self):
        x = self.f
        if x == 0.0:
            raise DomainError("division by zero")
        r = 1.0 / x
        return self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)

    def deriv(self):
        """Jet of the derivative; its third derivative is unknown and set to NaN."""
        return Jet3(self.d1, self.d2, self.d3, math.nan)

    def ipow(self, n):
        """Integer power by repeated squaring; any base for ``n >= 0``."""
        if n < 0:
            return self.ipow(-n).recip()
        result = Jet3(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result


# Outer-function derivative tables.  Each returns (g, g', g'', g''') at x.


def _sin(x):
    s, c = math.sin(x), math.cos(x)
    return s, c, -s, -c


def _cos(x):
    s, c = math.sin(x), math.cos(x)
    return c, -s, -c, s


def _tan(x):
    if abs(math.cos(x)) < 1e-12:
        raise DomainError(f"tan has a pole at {x!r}")
    t = math.tan(x)
    sec2 = 1.0 + t * t
    return t, sec2, 2.0 * t * sec2, sec2 * (2.0 + 6.0 * t * t)


def _asin(x):
    if not -1.0 < x < 1.0:
        raise DomainError(f"asin needs |x| < 1, got {x!r}")
    w = 1.0 - x * x
    r = 1.0 / math.sqrt(w)
    return math.asin(x), r, x * r / w, (1.0 + 2.0 * x * x) * r / (w * w)


def _acos(x):
    if not -1.0 < x < 1.0:
        raise DomainError(f"acos needs |x| < 1, got {x!r}")
    _, g1, g2, g3 = _asin(x)
    return math.acos(x), -g1, -g2, -g3


def _atan(x):
    w = 1.0 + x * x
    return math.atan(x), 1.0 / w, -2.0 * x / (w * w), (6.0 * x * x - 2.0) / (w * w * w)


def _sinh(x):
    s, c = math.sinh(x), math.cosh(x)
    return s, c, s, c


def _cosh(x):
    s, c = math.sinh(x), math.cosh(x)
    return c, s, c, s


def _tanh(x):
    t = math.tanh(x)
    w = 1.0 - t * t
    return t, w, -2.0 * t * w, w * (6.0 * t * t - 2.0)


def _exp(x):
    try:
        e = math.exp(x)
    except OverflowError:
        raise DomainError(f"exp overflow at {x!r}") from None
    return e, e, e, e


def _ln(x):
    if x <= 0.0:
        raise DomainError(f"ln needs a positive argument, got {x!r}")
    r = 1.0 / x
    return math.log(x), r, -r * r, 2.0 * r * r * r


def _sqrt(x):
    if x <= 0.0:
        raise DomainError(f"sqrt needs a positive argument, got {x!r}")
    r = math.sqrt(x)
    return r, 0.5 / r, -0.25 / (x * r), 0.375 / (x * x * r)


FUNCTIONS: dict[str, Callable[[float], tuple]] = {
    "sin": _sin,
    "cos": _cos,
    "tan": _tan,
    "asin": _asin,
    "acos": _acos,
    "atan": _atan,
    "sinh": _sinh,
    "cosh": _cosh,
    "tanh": _tanh,
    "exp": _exp,
    "ln": _ln,
    "sqrt": _sqrt,
}

BUILTIN_CONSTANTS = {"pi": math.pi, "e": math.e}

# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str
    value: float


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


@dataclass(frozen=True)
class Integral:
    """Running integral of ``integrand`` from ``lower`` to the parameter.

    Not part of the surface grammar; built programmatically when an
    antiderivative has no closed form.  Values come from quadrature, the
    derivatives are exact (they are the integrand's jet).
    """

    integrand: "Node"
    lower: float


Node = Union[Num, Const, Param, Neg, BinOp, Call, Integral]


@dataclass(frozen=True)
class Expression:
    """Immutable parsed expression in a single parameter."""

    root: Node
    parameter: str
    source: str = field(default="", compare=False)
    warnings: tuple = field(default=(), compare=False)
    _fn: Callable = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_fn", _compile(self.root, self.parameter))

    def jet(self, t):
        return self._fn(Jet3.variable(t))

    def __call__(self, t):
        return self._fn(Jet3(float(t))).f

    def depends_on_parameter(self):
        return _depends(self.root)

    def to_source(self):
        return to_source(self.root)

    def __str__(self):
        return self.to_source()


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str  # "num" | "ident" | "op" | "end"
    text: str
    offset: int  # byte offset


def _tokenize(source):
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {source[pos]!r}", byte_pos)
        text = m.group()
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, text, byte_pos))
        pos = m.end()
        byte_pos += len(text.encode("utf-8"))
    tokens.append(_Token("end", "", byte_pos))
    return tokens


class _Parser:
    def __init__(self, source, parameter, constants):
        self.tokens = _tokenize(source)
        self.i = 0
        self.parameter = parameter
        self.constants = constants

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.tok
        if tok.kind != "op" or tok.text != text:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExpressionSyntaxError(f"expected {text!r}, found {found}", tok.offset)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            if self.tok.text == ")":
                raise ExpressionSyntaxError("unbalanced ')'", self.tok.offset)
            raise ExpressionSyntaxError(f"unexpected token {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        base = self.unary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if self.tok.kind == "op" and self.tok.text == "(":
                if name not in FUNCTIONS:
                    raise BindingError(f"unknown function {name!r} at offset {tok.offset}")
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name in FUNCTIONS:
                raise ExpressionSyntaxError(f"function {name!r} needs an argument", self.tok.offset)
            if name == self.parameter:
                return Param(name)
            if name in self.constants:
                return Const(name, float(self.constants[name]))
            raise BindingError(f"unknown identifier {name!r} at offset {tok.offset}")
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxError(f"unexpected {found}", tok.offset)


def parse(source: str, parameter: str = "t", constants: Mapping[str, float] | None = None) -> Expression:
    """Parse ``source`` into an :class:`Expression` in ``parameter``.

    ``pi`` and ``e`` are predefined; entries in ``constants`` shadow them and
    the shadowing is recorded in ``Expression.warnings``.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    constants = dict(constants or {})
    warnings = []
    for name in BUILTIN_CONSTANTS:
        if name in constants:
            warnings.append(f"constant {name!r} shadows the built-in value")
    for name in constants:
        if name in FUNCTIONS:
            raise BindingError(f"constant {name!r} collides with a function name")
    if parameter in constants:
        warnings.append(f"constant {parameter!r} is shadowed by the parameter")
    bound = {**BUILTIN_CONSTANTS, **constants}
    root = _Parser(source, parameter, bound).parse()
    return Expression(root, parameter, source, tuple(warnings))


def constant(value: float, parameter: str = "t") -> Expression:
    return Expression(Num(float(value)), parameter, repr(float(value)))


# ---------------------------------------------------------------------------
# Pretty printing
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 4
    return 5


def _format_number(value):
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def to_source(node: Node) -> str:
    """Render an AST with the minimum parentheses needed to re-parse to the same tree."""
    if isinstance(node, Num):
        text = _format_number(node.value)
        return text if node.value >= 0 else f"({text})"
    if isinstance(node, (Const, Param)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Integral):
        raise ValueError("running integrals have no surface syntax")
    if isinstance(node, Neg):
        inner = to_source(node.operand)
        return f"-({inner})" if _prec(node.operand) < 4 else f"-{inner}"
    p = _PREC[node.op]
    left, right = to_source(node.left), to_source(node.right)
    if node.op == "^":
        # base must be a unary, exponent a factor
        if _prec(node.left) <= 3:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


# ---------------------------------------------------------------------------
# Compilation to jet closures
# ---------------------------------------------------------------------------


def _depends(node):
    if isinstance(node, Param):
        return True
    if isinstance(node, (Num, Const)):
        return False
    if isinstance(node, Neg):
        return _depends(node.operand)
    if isinstance(node, BinOp):
        return _depends(node.left) or _depends(node.right)
    if isinstance(node, Call):
        return _depends(node.arg)
    if isinstance(node, Integral):
        return True
    raise TypeError(f"unknown node {node!r}")


_MAX_INT_EXPONENT = 64


def _compile(node, parameter):
    if isinstance(node, (Num, Const)):
        value = node.value
        return lambda x: Jet3(value)
    if isinstance(node, Param):
        return lambda x: x
    if isinstance(node, Neg):
        inner = _compile(node.operand, parameter)
        return lambda x: -inner(x)
    if isinstance(node, Call):
        fn = FUNCTIONS[node.func]
        inner = _compile(node.arg, parameter)

        def call(x):
            u = inner(x)
            return u.compose(*fn(u.f))

        return call
    if isinstance(node, Integral):
        integrand = _compile(node.integrand, parameter)
        lower = node.lower

        def integral(x):
            value = adaptive_simpson(lambda s: integrand(Jet3(s)).f, lower, x.f, tol=1e-13)
            g = integrand(Jet3.variable(x.f))
            return x.compose(value, g.f, g.d1, g.d2)

        return integral
    left = _compile(node.left, parameter)
    right = _compile(node.right, parameter)
    op = node.op
    if op == "+":
        return lambda x: left(x) + right(x)
    if op == "-":
        return lambda x: left(x) - right(x)
    if op == "*":
        return lambda x: left(x) * right(x)
    if op == "/":
        def div(x):
            den = right(x)
            if den.f == 0.0:
                raise DomainError(f"division by zero at {x.f!r}")
            return left(x) / den

        return div
    # op == "^"
    if not _depends(node.right):
        exponent = right(Jet3(0.0)).f
        if float(exponent).is_integer() and abs(exponent) <= _MAX_INT_EXPONENT:
            n = int(exponent)

            def ipow(x):
                base = left(x)
                if n < 0 and base.f == 0.0:
                    raise DomainError(f"zero to a negative power at {x.f!r}")
                return base.ipow(n)

            return ipow

    def gpow(x):
        base = left(x)
        if base.f <= 0.0:
            raise DomainError(f"non-integer power needs a positive base, got {base.f!r}")
        u = right(x) * base.compose(*_ln(base.f))
        return u.compose(*_exp(u.f))

    return gpow


# ---------------------------------------------------------------------------
# Helpers used by the gallery
# ---------------------------------------------------------------------------


def substitute(node: Node, replacement: Node) -> Node:
    """Replace every parameter occurrence in ``node`` by ``replacement``."""
    if isinstance(node, Param):
        return replacement
    if isinstance(node, (Num, Const)):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, replacement))
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, replacement), substitute(node.right, replacement))
    if isinstance(node, Call):
        return Call(node.func, substitute(node.arg, replacement))
    raise TypeError(f"cannot substitute into {node!r}")


def compose(outer: Expression, inner: Expression) -> Expression:
    """``outer(inner(p))`` as an expression in ``inner``'s parameter."""
    return Expression(substitute(outer.root, inner.root), inner.parameter)


def polynomial_coefficients(node: Node):
    """Coefficients ``[c0, c1, ...]`` if ``node`` is a polynomial in the parameter, else ``None``."""

    def add(p, q):
        n = max(len(p), len(q))
        return [(p[i] if i < len(p) else 0.0) + (q[i] if i < len(q) else 0.0) for i in range(n)]

    def mul(p, q):
        out = [0.0] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            for j, b in enumerate(q):
                out[i + j] += a * b
        return out

    def walk(n):
        if isinstance(n, (Num, Const)):
            return [n.value]
        if isinstance(n, Param):
            return [0.0, 1.0]
        if isinstance(n, Neg):
            p = walk(n.operand)
            return None if p is None else [-c for c in p]
        if isinstance(n, BinOp):
            p = walk(n.left)
            if p is None:
                return None
            if n.op == "^":
                if _depends(n.right):
                    return None
                e = _compile(n.right, "")(Jet3(0.0)).f
                if not (float(e).is_integer() and 0 <= e <= _MAX_INT_EXPONENT):
                    return None
                out = [1.0]
                for _ in range(int(e)):
                    out = mul(out, p)
                return out
            q = walk(n.right)
            if q is None:
                return None
            if n.op == "+":
                return add(p, q)
            if n.op == "-":
                return add(p, [-c for c in q])
            if n.op == "*":
                return mul(p, q)
            if n.op == "/" and len(q) == 1 and q[0] != 0.0:
                return [c / q[0] for c in p]
            return None
        return None

    return walk(node)

"""Scalar functions: a small catalog plus a single-variable expression language.

Grammar (whitespace between tokens is ignored)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          # right-associative
    atom    := NUMBER | "x" | NAME | CALL "(" expr ")" | "(" expr ")"
    CALL    := "exp" | "log" | "sqrt" | "abs"
    NUMBER  := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
             | "." digits [exponent]
    NAME    := letter (letter | digit | "_")*   # parameter reference

So ``-x^2`` is ``-(x^2)`` and ``2^3^2`` is ``2^(3^2)``.  A non-integer
exponent needs a nonnegative base at evaluation time (positive when the
exponent is negative).
"""

from dataclasses import dataclass, field
import math
import re

import numpy as np

from .errors import (
    DomainError,
    ExpressionSyntaxError,
    ParameterError,
    UnknownIdentifierError,
)

CALLS = ("exp", "log", "sqrt", "abs")
MAX_DEPTH = 64
MAX_TREE_DEPTH = 160


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    arg: object


# ---------------------------------------------------------------- lexer

_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


def _tokenize(text):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        m = _NUMBER.match(text, i)
        if m:
            value = float(m.group())
            if not math.isfinite(value):
                raise ExpressionSyntaxError("numeric literal overflows", i)
            tokens.append(("num", value, i))
            i = m.end()
            continue
        m = _NAME.match(text, i)
        if m:
            tokens.append(("name", m.group(), i))
            i = m.end()
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text, known):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.depth = 0
        self.known = known

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExpressionSyntaxError(f"expected {kind!r}, found {what}", tok[2])
        self.pos += 1
        return tok

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExpressionSyntaxError("expression nested too deeply", self.peek()[2])

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExpressionSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        self.enter()
        try:
            if self.peek()[0] == "-":
                self.take()
                return Neg(self.unary())
            return self.power()
        finally:
            self.depth -= 1

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, value, offset = self.peek()
        if kind == "num":
            self.take()
            return Const(value)
        if kind == "(":
            self.take()
            self.enter()
            node = self.expr()
            self.depth -= 1
            self.take(")")
            return node
        if kind == "name":
            self.take()
            if value in CALLS:
                self.take("(")
                self.enter()
                arg = self.expr()
                self.depth -= 1
                self.take(")")
                return Call(value, arg)
            if value == "x":
                return Var()
            if self.known is not None and value not in self.known:
                raise UnknownIdentifierError(value, offset)
            return Param(value)
        if kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", offset)
        raise ExpressionSyntaxError(f"unexpected {value!r}", offset)


def parse_expression(text, params=None):
    """Parse ``text`` into an expression tree.

    ``text`` may be ``str`` or ``bytes`` (ASCII only).  When ``params`` is
    given, identifiers outside it are rejected at parse time; otherwise they
    become parameter references resolved at evaluation.
    """
    if isinstance(text, (bytes, bytearray)):
        for i, b in enumerate(text):
            if b > 127:
                raise ExpressionSyntaxError(f"non-ASCII byte 0x{b:02x}", i)
        text = text.decode("ascii")
    known = None if params is None else set(params)
    tree = _Parser(text, known).parse()
    if _depth(tree) > MAX_TREE_DEPTH:
        raise ExpressionSyntaxError("expression nested too deeply", 0)
    return tree


def _children(node):
    if isinstance(node, Neg):
        return (node.operand,)
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, Call):
        return (node.arg,)
    return ()


def _depth(tree):
    deepest = 0
    stack = [(tree, 1)]
    while stack:
        node, d = stack.pop()
        deepest = max(deepest, d)
        stack.extend((c, d + 1) for c in _children(node))
    return deepest


def unparse(node):
    """Render a tree as text that parses back to an equal tree."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Neg):
        return f"(-{unparse(node.operand)})"
    if isinstance(node, BinOp):
        return f"({unparse(node.left)} {node.op} {unparse(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({unparse(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_params(node):
    if isinstance(node, Param):
        return {node.name}
    if isinstance(node, (Const, Var)):
        return set()
    if isinstance(node, Neg):
        return free_params(node.operand)
    if isinstance(node, BinOp):
        return free_params(node.left) | free_params(node.right)
    if isinstance(node, Call):
        return free_params(node.arg)
    raise TypeError(f"not an expression node: {node!r}")


def _power(base, expo):
    base = np.asarray(base, dtype=float)
    expo = np.asarray(expo, dtype=float)
    nonint = expo != np.round(expo)
    bad = (nonint & (base < 0)) | ((expo < 0) & (base == 0))
    if np.any(bad):
        value = float(np.ravel(np.broadcast_to(base, bad.shape)[bad])[0])
        raise DomainError("'^' with non-integer exponent needs a nonnegative base", value=value)
    return np.power(base, expo)


def evaluate(node, x, params=None):
    """Evaluate a tree at ``x`` (scalar or array) with the parameter table."""
    params = params or {}

    def ev(nd):
        if isinstance(nd, Const):
            return np.float64(nd.value)
        if isinstance(nd, Var):
            return x
        if isinstance(nd, Param):
            try:
                return np.float64(params[nd.name])
            except KeyError:
                raise UnknownIdentifierError(nd.name) from None
        if isinstance(nd, Neg):
            return -ev(nd.operand)
        if isinstance(nd, BinOp):
            a = ev(nd.left)
            b = ev(nd.right)
            if nd.op == "+":
                return a + b
            if nd.op == "-":
                return a - b
            if nd.op == "*":
                return a * b
            if nd.op == "/":
                if np.any(np.asarray(b) == 0):
                    raise DomainError("division by zero", value=0.0)
                return a / b
            return _power(a, b)
        if isinstance(nd, Call):
            a = np.asarray(ev(nd.arg), dtype=float)
            if nd.name == "log":
                if np.any(a <= 0):
                    raise DomainError("log of a non-positive value", value=float(np.min(a)))
                return np.log(a)
            if nd.name == "sqrt":
                if np.any(a < 0):
                    raise DomainError("sqrt of a negative value", value=float(np.min(a)))
                return np.sqrt(a)
            if nd.name == "exp":
                return np.exp(a)
            return np.abs(a)
        raise TypeError(f"not an expression node: {nd!r}")

    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return ev(node)


# ---------------------------------------------------------------- functions


@dataclass(frozen=True)
class Domain:
    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = True
    hi_closed: bool = True

    def contains(self, x):
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return bool(above and below)

    def mask(self, x):
        x = np.asarray(x, dtype=float)
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above & below

    def contains_interval(self, lo, hi):
        return self.contains(lo) and self.contains(hi)

    def __str__(self):
        left = "[" if self.lo_closed and math.isfinite(self.lo) else "("
        right = "]" if self.hi_closed and math.isfinite(self.hi) else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


REAL_LINE = Domain()
POSITIVE = Domain(0.0, math.inf, lo_closed=False)
NONNEGATIVE = Domain(0.0, math.inf)


@dataclass(frozen=True)
class ScalarFunction:
    """A real function of one real variable with a domain.

    ``source`` is a catalog name (``"power"``) or expression text; ``params``
    holds catalog parameters or the expression's parameter table.
    """

    source: str
    domain: Domain = REAL_LINE
    params: tuple = ()
    kind: str = "catalog"
    _impl: object = field(default=None, compare=False, repr=False)

    @property
    def param_table(self):
        return dict(self.params)

    def __call__(self, x):
        return eval_function(self, x)

    def __str__(self):
        if not self.params:
            return self.source
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.source}({inner})"

    def to_json(self):
        return {
            "kind": self.kind,
            "source": self.source,
            "params": dict(self.params),
            "domain": [self.domain.lo, self.domain.hi, self.domain.lo_closed, self.domain.hi_closed],
        }


def eval_function(f, x, params=None):
    """Evaluate ``f`` at ``x``; raises on domain violations or non-finite results.

    ``params`` overrides entries of the function's own parameter table.
    """
    arr = np.asarray(x, dtype=float)
    inside = f.domain.mask(arr)
    if not np.all(inside):
        bad = np.ravel(arr)[~np.ravel(inside)][0]
        raise DomainError(f"{bad!r} outside domain {f.domain} of {f}", value=float(bad))
    table = f.param_table
    if params:
        table.update(params)
    if f.kind == "expression":
        out = evaluate(f._impl, arr, table)
    else:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = f._impl(arr, **table)
    out = np.asarray(out, dtype=float)
    if out.shape != arr.shape:
        out = np.broadcast_to(out, arr.shape).copy()
    if not np.all(np.isfinite(out)):
        bad = np.ravel(arr)[~np.isfinite(np.ravel(out))][0]
        raise DomainError(f"{f} is not finite at {bad!r}", value=float(bad))
    return out if out.ndim else float(out)


def _power_domain(p):
    if float(p).is_integer() and p >= 0:
        return REAL_LINE
    if p > 0:
        return NONNEGATIVE
    return POSITIVE


def _q_log(x, q):
    return (np.power(x, 1.0 - q) - 1.0) / (1.0 - q)


def _tsallis_dev(x, q):
    return (np.power(x, q) - 1.0) / q


_CATALOG = {
    "exp": (lambda x: np.exp(x), lambda: REAL_LINE, ()),
    "log": (lambda x: np.log(x), lambda: POSITIVE, ()),
    "sqrt": (lambda x: np.sqrt(x), lambda: NONNEGATIVE, ()),
    "abs": (lambda x: np.abs(x), lambda: REAL_LINE, ()),
    "identity": (lambda x: x + 0.0, lambda: REAL_LINE, ()),
    "square": (lambda x: x * x, lambda: REAL_LINE, ()),
    "inverse": (lambda x: 1.0 / x, lambda: POSITIVE, ()),
    "const": (lambda x, c: np.full_like(x, c, dtype=float), lambda c: REAL_LINE, ("c",)),
    "power": (lambda x, p: np.power(x, p), _power_domain, ("p",)),
    "q_log": (_q_log, lambda q: POSITIVE, ("q",)),
    "tsallis_dev": (_tsallis_dev, lambda q: POSITIVE, ("q",)),
}


def catalog(name, **params):
    """Build a catalog function, e.g. ``catalog("power", p=2)``."""
    try:
        impl, dom, names = _CATALOG[name]
    except KeyError:
        raise ParameterError(f"unknown catalog function {name!r}; known: {sorted(_CATALOG)}") from None
    if set(params) != set(names):
        raise ParameterError(f"{name} takes parameters {names}, got {tuple(params)}")
    if name == "q_log" and params["q"] == 1:
        raise ParameterError("q_log needs q != 1 (the q -> 1 limit is log)")
    if name == "tsallis_dev" and params["q"] == 0:
        raise ParameterError("tsallis_dev needs q != 0")
    values = tuple((k, float(params[k])) for k in names)
    return ScalarFunction(name, dom(**params), values, "catalog", impl)


def from_expression(text, params=None, domain=REAL_LINE):
    """Build a function from expression text; every identifier must be bound in ``params``."""
    params = dict(params or {})
    tree = parse_expression(text, params=params.keys())
    values = tuple(sorted((k, float(v)) for k, v in params.items()))
    return ScalarFunction(text, domain, values, "expression", tree)


def catalog_names():
    return sorted(_CATALOG)


def function_from_spec(spec, params=None, domain=None):
    """Resolve a CLI-style function spec.

    ``spec`` is either a catalog name (``"power"``, parameters taken from
    ``params``) or expression text.
    """
    params = dict(params or {})
    if spec in _CATALOG:
        _, _, names = _CATALOG[spec]
        return catalog(spec, **{k: params[k] for k in names if k in params})
    return from_expression(spec, params, domain if domain is not None else REAL_LINE)


def function_from_json(obj):
    params = obj.get("params", {})
    if obj.get("kind", "catalog") == "catalog":
        return catalog(obj["source"], **params)
    lo, hi, lc, hc = obj.get("domain", [-math.inf, math.inf, True, True])
    return from_expression(obj["source"], params, Domain(lo, hi, lc, hc))

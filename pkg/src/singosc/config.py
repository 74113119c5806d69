"""Scenario documents and the small time-expression language.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*`` and ``/``)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | 't' | 'pi' | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Functions: sin, cos, exp, sqrt, tanh, log, pow.
"""

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CollapseError, ExpressionError, ScenarioError

FUNCTIONS = {
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "exp": (1, np.exp),
    "sqrt": (1, np.sqrt),
    "tanh": (1, np.tanh),
    "log": (1, np.log),
    "pow": (2, np.power),
}

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


# -- AST --------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Pi:
    pass


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
    args: tuple


T = Var()


def _prec(node):
    if isinstance(node, BinOp):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[node.op]
    if isinstance(node, Neg):
        return _PREC_UNARY
    if isinstance(node, Num) and node.value < 0:
        return _PREC_UNARY
    return _PREC_ATOM


def _fmt_num(v):
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def to_text(node):
    """Render an AST so that parsing the text gives the same AST back."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if _prec(node.operand) < _PREC_UNARY:
            inner = f"({inner})"
        return f"-{inner}"
    p = _prec(node)
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) <= _PREC_POW:
            left = f"({left})"
        if _prec(node.right) < _PREC_UNARY:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


# -- parser -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, value=None):
        kind, val, pos = self.tokens[self.i]
        if value is not None and val != value:
            what = "end of input" if kind == "end" else repr(val)
            raise ExpressionError(f"expected {value!r}, found {what}", pos)
        self.i += 1
        return kind, val, pos

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected token {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, _ = self.take()
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, _ = self.take()
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "t":
                return T
            if val == "pi":
                return Pi()
            if val not in FUNCTIONS:
                raise ExpressionError(f"unknown identifier {val!r}", pos)
            arity = FUNCTIONS[val][0]
            self.take("(")
            args = [self.expr()]
            while self.peek()[1] == ",":
                self.take()
                args.append(self.expr())
            self.take(")")
            if len(args) != arity:
                raise ExpressionError(f"{val} takes {arity} argument(s), got {len(args)}", pos)
            return Call(val, tuple(args))
        if kind == "op" and val == "(":
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExpressionError(f"unexpected {what}", pos)


# -- evaluation and calculus -------------------------------------------------

def evaluate(node, t):
    if isinstance(node, Num):
        return node.value + 0.0 * np.asarray(t, dtype=float) if np.ndim(t) else node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Pi):
        return math.pi + 0.0 * np.asarray(t, dtype=float) if np.ndim(t) else math.pi
    if isinstance(node, Neg):
        return -evaluate(node.operand, t)
    if isinstance(node, Call):
        fn = FUNCTIONS[node.name][1]
        return fn(*(evaluate(a, t) for a in node.args))
    a, b = evaluate(node.left, t), evaluate(node.right, t)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


def _has_t(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return _has_t(node.operand)
    if isinstance(node, BinOp):
        return _has_t(node.left) or _has_t(node.right)
    if isinstance(node, Call):
        return any(_has_t(a) for a in node.args)
    return False


def _num(node):
    return node.value if isinstance(node, Num) else None


def _neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _add(a, b):
    x, y = _num(a), _num(b)
    if x is not None and y is not None:
        return Num(x + y)
    if x == 0:
        return b
    if y == 0:
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    x, y = _num(a), _num(b)
    if x is not None and y is not None:
        return Num(x - y)
    if y == 0:
        return a
    if x == 0:
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    x, y = _num(a), _num(b)
    if x is not None and y is not None:
        return Num(x * y)
    if x == 0 or y == 0:
        return Num(0.0)
    if x == 1:
        return b
    if y == 1:
        return a
    if y is not None:
        a, b, x = b, a, y
    if x is not None and isinstance(b, BinOp) and b.op == "*" and isinstance(b.left, Num):
        return _mul(Num(x * b.left.value), b.right)
    return BinOp("*", a, b)


def _div(a, b):
    x, y = _num(a), _num(b)
    if x is not None and y is not None and y != 0:
        return Num(x / y)
    if x == 0:
        return Num(0.0)
    if y == 1:
        return a
    return BinOp("/", a, b)


def _pow(a, b):
    x, y = _num(a), _num(b)
    if x is not None and y is not None:
        return Num(x**y)
    if y == 0:
        return Num(1.0)
    if y == 1:
        return a
    return BinOp("^", a, b)


def simplify(node):
    if isinstance(node, Neg):
        return _neg(simplify(node.operand))
    if isinstance(node, Call):
        return Call(node.name, tuple(simplify(a) for a in node.args))
    if isinstance(node, BinOp):
        a, b = simplify(node.left), simplify(node.right)
        return {"+": _add, "-": _sub, "*": _mul, "/": _div, "^": _pow}[node.op](a, b)
    return node


def _d(node):
    if isinstance(node, (Num, Pi)):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0)
    if isinstance(node, Neg):
        return _neg(_d(node.operand))
    if isinstance(node, Call):
        if node.name == "pow":
            return _d(BinOp("^", *node.args))
        u = node.args[0]
        du = _d(u)
        if node.name == "sin":
            outer = Call("cos", (u,))
        elif node.name == "cos":
            outer = _neg(Call("sin", (u,)))
        elif node.name == "exp":
            outer = node
        elif node.name == "sqrt":
            outer = _div(Num(0.5), node)
        elif node.name == "tanh":
            outer = _sub(Num(1.0), _pow(node, Num(2.0)))
        else:  # log
            outer = _div(Num(1.0), u)
        return _mul(du, outer)
    a, b = node.left, node.right
    da, db = _d(a), _d(b)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if node.op == "/":
        return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, Num(2.0)))
    # power
    if not _has_t(b):
        return _mul(_mul(b, _pow(a, _sub(b, Num(1.0)))), da)
    return _mul(node, _add(_mul(db, Call("log", (a,))), _div(_mul(b, da), a)))


class Expression:
    """Parsed time expression ``f(t)``; callable on scalars or numpy arrays."""

    def __init__(self, node, text=None):
        self.node = node
        self.text = text if text is not None else to_text(node)

    def __call__(self, t):
        return evaluate(self.node, t)

    def derivative(self):
        return Expression(simplify(_d(self.node)))

    def __eq__(self, other):
        return isinstance(other, Expression) and self.node == other.node

    def __hash__(self):
        return hash(self.node)

    def __str__(self):
        return to_text(self.node)

    def __repr__(self):
        return f"Expression({self.text!r})"


def parse_expression(text):
    """Parse ``text`` into an :class:`Expression`.

    Raises :class:`ExpressionError` carrying the byte offset of the problem.
    """
    return Expression(_Parser(str(text)).parse(), str(text))


def differentiate(expr):
    return expr.derivative()


class TabulatedFunction:
    """Cubic-spline interpolant of sampled values; derivatives stay splines."""

    def __init__(self, times, values, _spline=None):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._spline = _spline if _spline is not None else CubicSpline(self.times, self.values)
        self.text = "table"

    def __call__(self, t):
        out = self._spline(t)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self):
        return TabulatedFunction(self.times, self.values, self._spline.derivative())

    def __str__(self):
        return "table"


# -- scenarios ----------------------------------------------------------------

_KNOWN_KEYS = {
    "m", "m_table", "omega", "b", "c", "m0", "omega0", "hbar", "t0", "t1", "dt",
    "canonical_start", "grid", "tolerances", "eps0", "name",
}
CANONICAL_TOL = 1e-10


@dataclass
class Scenario:
    """Time-dependent coefficients of the singular oscillator plus numerics."""

    m: object
    omega: object
    b: object
    c: float
    m0: float = 1.0
    omega0: float = 1.0
    hbar: float = 1.0
    t_span: tuple = (0.0, 10.0)
    dt: float = 1e-3
    canonical_start: bool = True
    grid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    eps0: tuple = None
    name: str = "scenario"
    source: str = ""

    def __post_init__(self):
        self.dm = self.m.derivative()
        self.ddm = self.dm.derivative()
        self.db = self.b.derivative()

    def g(self, t):
        """Inverse-square coupling g(t) = c hbar^2 / (2 m(t))."""
        return self.c * self.hbar**2 / (2.0 * self.m(t))

    @property
    def t0(self):
        return self.t_span[0]

    @property
    def t1(self):
        return self.t_span[1]

    def digest(self):
        return hashlib.sha256(self.source.encode()).hexdigest()[:16]

    def validate(self):
        """Check the invariants; raise :class:`ScenarioError` naming the first failure."""
        if 1.0 + 4.0 * self.c < 0.0:
            raise CollapseError(
                f"collapse: 1 + 4c = {1 + 4 * self.c:.6g} < 0 (collapse-free case requires 1 + 4c >= 0)"
            )
        for key in ("m0", "omega0", "hbar", "dt"):
            if not getattr(self, key) > 0:
                raise ScenarioError(f"{key} must be positive")
        if not self.t1 > self.t0:
            raise ScenarioError("t1 must exceed t0")
        ts = np.linspace(self.t0, self.t1, max(int(round((self.t1 - self.t0) / self.dt)) + 1, 2))
        with np.errstate(all="ignore"):
            mv = np.asarray(self.m(ts), dtype=float) * np.ones_like(ts)
            for label, f in (("omega", self.omega), ("b", self.b)):
                vals = np.asarray(f(ts), dtype=float) * np.ones_like(ts)
                if not np.all(np.isfinite(vals)):
                    raise ScenarioError(f"{label}(t) is not finite on the span")
        if not np.all(np.isfinite(mv)) or np.any(mv <= 0.0):
            bad = ts[np.argmax(~(mv > 0))]
            raise ScenarioError(f"m(t) must stay positive on the span (fails near t = {bad:.6g})")
        if self.canonical_start:
            t0 = self.t0
            checks = (("b(t0)", self.b(t0)), ("db/dt(t0)", self.db(t0)), ("dm/dt(t0)", self.dm(t0)))
            for label, value in checks:
                if abs(float(value)) > CANONICAL_TOL:
                    raise ScenarioError(
                        f"canonical start requires {label} = 0, got {float(value):.6g}"
                    )
        return self


def _as_function(doc, key, default=None):
    value = doc.get(key, default)
    if value is None:
        raise ScenarioError(f"missing required key {key!r}")
    if isinstance(value, (int, float)):
        value = repr(float(value))
    try:
        return parse_expression(value)
    except ExpressionError as exc:
        raise ScenarioError(f"{key}: {exc}") from exc


def scenario_from_dict(doc, strict=False, source=None):
    if strict:
        unknown = set(doc) - _KNOWN_KEYS
        if unknown:
            raise ScenarioError(f"unknown keys: {sorted(unknown)}")
    if "m_table" in doc:
        tab = doc["m_table"]
        try:
            m = TabulatedFunction(tab["t"], tab["m"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"m_table must hold equal-length 't' and 'm' lists: {exc}") from exc
    else:
        m = _as_function(doc, "m")
    omega = _as_function(doc, "omega")
    b = _as_function(doc, "b", "0")
    if "c" not in doc:
        raise ScenarioError("missing required key 'c'")
    t0 = float(doc.get("t0", 0.0))
    eps0 = doc.get("eps0")
    if eps0 is not None:
        eps0 = (complex(*eps0[0]), complex(*eps0[1]))
    try:
        sc = Scenario(
            m=m,
            omega=omega,
            b=b,
            c=float(doc["c"]),
            m0=float(doc.get("m0", m(t0))),
            omega0=float(doc.get("omega0", abs(omega(t0)))),
            hbar=float(doc.get("hbar", 1.0)),
            t_span=(t0, float(doc.get("t1", 10.0))),
            dt=float(doc.get("dt", 1e-3)),
            canonical_start=bool(doc.get("canonical_start", True)),
            grid=dict(doc.get("grid", {})),
            tolerances=dict(doc.get("tolerances", {})),
            eps0=eps0,
            name=str(doc.get("name", "scenario")),
            source=source if source is not None else json.dumps(doc, sort_keys=True),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc)) from exc
    return sc.validate()


def load_scenario(source, strict=False):
    """Load a scenario from a path, a JSON string or a mapping."""
    if isinstance(source, dict):
        return scenario_from_dict(source, strict=strict)
    text = str(source)
    path = Path(text)
    if not text.lstrip().startswith("{") and path.exists():
        text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    return scenario_from_dict(doc, strict=strict, source=text)


def stationary(c=2.0, m=1.0, omega=1.0, t1=10.0, dt=1e-3, **extra):
    """Constant-coefficient scenario; handy for tests and demos."""
    doc = {"m": m, "omega": omega, "b": 0.0, "c": c, "t0": 0.0, "t1": t1, "dt": dt}
    doc.update(extra)
    return scenario_from_dict(doc)

"""Expression language for Young functions, kernels and Morrey weights.

Expressions are functions of a single variable ``t``. Evaluation is
vectorised over numpy arrays and follows extended-real conventions:
overflow saturates to ``inf`` and ``0 * inf == 0``.

Grammar::

    expr      = term { ("+" | "-") term } ;
    term      = unary { ("*" | "/") unary } ;
    unary     = "-" unary | power ;
    power     = atom [ "^" unary ] ;
    atom      = number | "t" | "e" | "inf" | name
              | func "(" expr { "," expr } ")"
              | piecewise | "(" expr ")" ;
    func      = "ln" | "exp" | "min" | "max" ;
    piecewise = "piecewise" "(" branch { ";" branch } ")" ;
    branch    = guard ":" expr ;
    guard     = "t" cmp literal | literal cmp "t" [ cmp literal ] ;
    cmp       = "<" | "<=" | ">" | ">=" ;
    literal   = number | name | "inf" ;

``name`` must be supplied through ``bindings`` at parse time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "DslError",
    "DslSyntaxError",
    "GuardCoverageError",
    "DslDomainError",
    "Num",
    "Var",
    "Const",
    "Neg",
    "Bin",
    "Call",
    "Guard",
    "Piecewise",
    "parse",
    "render",
    "evaluate",
    "compile_expr",
    "Diagnostic",
    "validate_young",
    "validate_kernel",
    "contains_inf",
    "breakpoints",
]


class DslError(ValueError):
    pass


class DslSyntaxError(DslError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class GuardCoverageError(DslError):
    pass


class DslDomainError(DslError):
    pass


# AST ------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str  # "e" or "inf"


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


@dataclass(frozen=True)
class Guard:
    lo: float
    lo_closed: bool
    hi: float
    hi_closed: bool

    def mask(self, t: np.ndarray) -> np.ndarray:
        lower = t >= self.lo if self.lo_closed else t > self.lo
        upper = t <= self.hi if self.hi_closed else t < self.hi
        return lower & upper


@dataclass(frozen=True)
class Piecewise:
    branches: tuple  # of (Guard, expr)


_FUNCS = {"ln": 1, "exp": 1, "min": None, "max": None}
_RESERVED = {"t", "e", "inf", "piecewise"} | set(_FUNCS)

# Tokenizer --------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|[-+*/^(),:;<>])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()))
        kind = m.lastgroup
        if kind != "ws":
            # a number immediately followed by a name, e.g. "2e", is not implicit multiplication
            toks.append(_Tok(kind, m.group(), len(text[:pos].encode())))
        pos = m.end()
    toks.append(_Tok("end", "", len(text.encode())))
    return toks


# Parser -----------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, bindings: Mapping[str, float]):
        self.toks = _tokenize(text)
        self.i = 0
        self.bindings = dict(bindings)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text:
            found = tok.text or "end of input"
            raise DslSyntaxError(f"expected {text!r}, found {found!r}", tok.offset)
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise DslSyntaxError(f"unexpected token {tok.text!r}", tok.offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek().text == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().text == "^":
            self.next()
            return Bin("^", base, self.unary())
        return base

    def _number_node(self, value: float):
        if math.isinf(value):
            return Const("inf") if value > 0 else Neg(Const("inf"))
        return Neg(Num(-value)) if value < 0 else Num(value)

    def atom(self):
        tok = self.next()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            name = tok.text
            if name == "t":
                return Var()
            if name in ("e", "inf"):
                return Const(name)
            if name == "piecewise":
                return self.piecewise(tok)
            if name in _FUNCS:
                self.expect("(")
                args = [self.expr()]
                while self.peek().text == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                arity = _FUNCS[name]
                if arity is not None and len(args) != arity:
                    raise DslSyntaxError(f"{name} takes {arity} argument(s)", tok.offset)
                if arity is None and len(args) < 2:
                    raise DslSyntaxError(f"{name} takes at least 2 arguments", tok.offset)
                return Call(name, tuple(args))
            if name in self.bindings:
                return self._number_node(float(self.bindings[name]))
            raise DslSyntaxError(f"unbound name {name!r}", tok.offset)
        found = tok.text or "end of input"
        raise DslSyntaxError(f"unexpected token {found!r}", tok.offset)

    def literal(self) -> float:
        tok = self.next()
        sign = 1.0
        if tok.text == "-":
            sign = -1.0
            tok = self.next()
        if tok.kind == "num":
            return sign * float(tok.text)
        if tok.text == "inf":
            return sign * math.inf
        if tok.text == "e":
            return sign * math.e
        if tok.kind == "name" and tok.text in self.bindings:
            return sign * float(self.bindings[tok.text])
        raise DslSyntaxError("guard bound must be a literal", tok.offset)

    def guard(self) -> Guard:
        start = self.peek()
        if start.text == "t":
            self.next()
            cmp = self.next()
            if cmp.text not in ("<", "<=", ">", ">="):
                raise DslSyntaxError("expected comparison", cmp.offset)
            bound = self.literal()
            if cmp.text == "<":
                return Guard(0.0, True, bound, False)
            if cmp.text == "<=":
                return Guard(0.0, True, bound, True)
            if cmp.text == ">":
                return Guard(bound, False, math.inf, False)
            return Guard(bound, True, math.inf, False)
        lo = self.literal()
        cmp = self.next()
        if cmp.text not in ("<", "<="):
            raise DslSyntaxError("interval guards must read lo < t < hi", cmp.offset)
        tvar = self.next()
        if tvar.text != "t":
            raise DslSyntaxError("guard must compare t", tvar.offset)
        if self.peek().text in ("<", "<="):
            cmp2 = self.next()
            hi = self.literal()
            return Guard(lo, cmp.text == "<=", hi, cmp2.text == "<=")
        return Guard(lo, cmp.text == "<=", math.inf, False)

    def piecewise(self, head: _Tok):
        self.expect("(")
        branches = []
        while True:
            g = self.guard()
            self.expect(":")
            branches.append((g, self.expr()))
            if self.peek().text == ";":
                self.next()
                continue
            break
        self.expect(")")
        _check_coverage([g for g, _ in branches], head.offset)
        return Piecewise(tuple(branches))


def _check_coverage(guards: Sequence[Guard], offset: int) -> None:
    """Guards must partition [0, inf) without gaps or overlaps."""
    for g in guards:
        if g.lo > g.hi or (g.lo == g.hi and not (g.lo_closed and g.hi_closed)):
            raise GuardCoverageError(f"empty guard interval at byte {offset}")
    ordered = sorted(guards, key=lambda g: (g.lo, not g.lo_closed))
    first = ordered[0]
    if first.lo > 0 or (first.lo == 0 and not first.lo_closed):
        raise GuardCoverageError(f"guards do not cover t = 0 (byte {offset})")
    for a, b in zip(ordered, ordered[1:]):
        if b.lo < a.hi or (b.lo == a.hi and a.hi_closed and b.lo_closed):
            raise GuardCoverageError(f"overlapping guards near t = {b.lo} (byte {offset})")
        if b.lo > a.hi or (not a.hi_closed and not b.lo_closed):
            raise GuardCoverageError(f"gap between guards at t = {a.hi} (byte {offset})")
    if ordered[-1].hi != math.inf:
        raise GuardCoverageError(f"guards do not extend to infinity (byte {offset})")


def parse(text: str, bindings: Mapping[str, float] | None = None):
    """Parse ``text`` into an immutable AST; names are resolved from ``bindings``."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text, bindings or {}).parse()


# Rendering ----------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node) -> int:
    if isinstance(node, Bin):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return 5


def _fmt_num(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _render_guard(g: Guard) -> str:
    if g.lo == 0 and g.lo_closed:
        return f"t{'<=' if g.hi_closed else '<'}{_fmt_num(g.hi)}" if g.hi != math.inf else "t>=0"
    if g.hi == math.inf:
        return f"t{'>=' if g.lo_closed else '>'}{_fmt_num(g.lo)}"
    return f"{_fmt_num(g.lo)}{'<=' if g.lo_closed else '<'}t{'<=' if g.hi_closed else '<'}{_fmt_num(g.hi)}"


def render(node) -> str:
    """Text form of an AST; ``parse(render(a)) == a``."""
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        inner = render(node.operand)
        if _prec(node.operand) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Bin):
        p = _PREC[node.op]
        left, right = render(node.left), render(node.right)
        if node.op == "^":
            if _prec(node.left) <= p:
                left = f"({left})"
            if _prec(node.right) < _PREC["neg"]:
                right = f"({right})"
        else:
            if _prec(node.left) < p:
                left = f"({left})"
            if _prec(node.right) <= p:
                right = f"({right})"
        return f"{left}{node.op}{right}" if node.op in "^*/" else f"{left} {node.op} {right}"
    if isinstance(node, Call):
        return f"{node.func}({', '.join(render(a) for a in node.args)})"
    if isinstance(node, Piecewise):
        parts = [f"{_render_guard(g)}: {render(e)}" for g, e in node.branches]
        return f"piecewise({'; '.join(parts)})"
    raise TypeError(f"not an expression node: {node!r}")


def contains_inf(node) -> bool:
    if isinstance(node, Const):
        return node.name == "inf"
    if isinstance(node, Num):
        return math.isinf(node.value)
    if isinstance(node, Neg):
        return contains_inf(node.operand)
    if isinstance(node, Bin):
        return contains_inf(node.left) or contains_inf(node.right)
    if isinstance(node, Call):
        return any(contains_inf(a) for a in node.args)
    if isinstance(node, Piecewise):
        return any(contains_inf(e) for _, e in node.branches)
    return False


def breakpoints(node) -> tuple:
    """Finite positive guard boundaries anywhere in the tree, sorted."""
    found = set()

    def walk(x):
        if isinstance(x, Neg):
            walk(x.operand)
        elif isinstance(x, Bin):
            walk(x.left)
            walk(x.right)
        elif isinstance(x, Call):
            for a in x.args:
                walk(a)
        elif isinstance(x, Piecewise):
            for g, e in x.branches:
                found.update(v for v in (g.lo, g.hi) if 0 < v < math.inf)
                walk(e)

    walk(node)
    return tuple(sorted(found))


# Evaluation ---------------------------------------------------------------------


def _mul(a, b):
    out = a * b
    zero_inf = ((a == 0) & np.isinf(b)) | (np.isinf(a) & (b == 0))
    return np.where(zero_inf, 0.0, out)


def _div(a, b):
    if np.any((a == 0) & (b == 0)) or np.any(np.isinf(a) & np.isinf(b)):
        raise DslDomainError("indeterminate quotient")
    with np.errstate(divide="ignore"):
        out = a / b
    return out


def _pow(a, b):
    bad = (a < 0) & (b != np.round(b))
    if np.any(bad):
        raise DslDomainError("fractional power of a negative number")
    return np.power(a, b)


def _eval(node, t: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(t.shape, node.value)
    if isinstance(node, Var):
        return t
    if isinstance(node, Const):
        return np.full(t.shape, math.e if node.name == "e" else math.inf)
    if isinstance(node, Neg):
        return -_eval(node.operand, t)
    if isinstance(node, Bin):
        a = _eval(node.left, t)
        b = _eval(node.right, t)
        if node.op == "+":
            out = a + b
        elif node.op == "-":
            out = a - b
        elif node.op == "*":
            out = _mul(a, b)
        elif node.op == "/":
            out = _div(a, b)
        else:
            out = _pow(a, b)
        if np.any(np.isnan(out)):
            raise DslDomainError(f"undefined result for operator {node.op!r}")
        return out
    if isinstance(node, Call):
        args = [_eval(a, t) for a in node.args]
        if node.func == "ln":
            if np.any(args[0] <= 0):
                raise DslDomainError("ln of a nonpositive number")
            return np.log(args[0])
        if node.func == "exp":
            return np.exp(args[0])
        if node.func == "min":
            return np.minimum.reduce(args)
        return np.maximum.reduce(args)
    if isinstance(node, Piecewise):
        out = np.empty(t.shape)
        for guard, expr in node.branches:
            m = guard.mask(t)
            if np.any(m):
                out[m] = _eval(expr, t[m])
        return out
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(ast, t, bindings: Mapping[str, float] | None = None):
    """Evaluate ``ast`` at ``t`` (scalar or array, t >= 0).

    ``bindings`` is accepted for symmetry with :func:`parse`; names are
    already folded into the AST, so it has no effect here.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DslDomainError("expressions are defined for t >= 0 only")
    flat = np.atleast_1d(arr).ravel()
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        out = _eval(ast, flat)
    out = np.asarray(out, dtype=float).reshape(np.atleast_1d(arr).shape)
    if arr.ndim == 0:
        return float(out[0])
    return out


def compile_expr(text: str, bindings: Mapping[str, float] | None = None):
    """Parse ``text`` and return ``(ast, vectorised callable)``."""
    ast = parse(text, bindings)
    return ast, lambda t: evaluate(ast, t)


# Validation ---------------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    check: str
    ok: bool
    witness: tuple = ()
    detail: str = ""


def _default_probe() -> np.ndarray:
    return np.logspace(-6, 6, 12 * 48 + 1)


def _branch_continuity(ast) -> list[Diagnostic]:
    out = []
    if not isinstance(ast, Piecewise):
        return out
    for g, _ in ast.branches:
        b = g.hi
        if b == math.inf:
            continue
        left = [e for gg, e in ast.branches if gg.mask(np.array([b * (1 - 1e-12)]))[0]]
        right = [e for gg, e in ast.branches if gg.mask(np.array([b * (1 + 1e-12) + 1e-300]))[0]]
        if not left or not right:
            continue
        try:
            lv = float(evaluate(left[0], b))
            rv = float(evaluate(right[0], b))
        except DslDomainError as exc:
            out.append(Diagnostic("continuity", False, (b,), str(exc)))
            continue
        same = lv == rv or (math.isfinite(lv) and math.isfinite(rv) and abs(lv - rv) <= 1e-9 * max(abs(lv), abs(rv), 1e-300))
        out.append(Diagnostic("continuity", bool(same), (b, lv, rv), "branch values at shared boundary"))
    return out


def validate_young(ast, probe=None) -> list[Diagnostic]:
    """Check Phi(0) = 0, monotonicity and midpoint convexity on ``probe``."""
    probe = np.sort(np.asarray(_default_probe() if probe is None else probe, dtype=float))
    diags: list[Diagnostic] = []
    try:
        v0 = float(evaluate(ast, 0.0))
        vals = np.asarray(evaluate(ast, probe))
    except DslDomainError as exc:
        return [Diagnostic("evaluation", False, (), str(exc))]
    diags.append(Diagnostic("zero_at_origin", v0 == 0.0, (0.0, v0)))
    if np.any(vals < 0):
        i = int(np.argmax(vals < 0))
        diags.append(Diagnostic("nonnegative", False, (float(probe[i]), float(vals[i]))))
    else:
        diags.append(Diagnostic("nonnegative", True))
    drop = np.nonzero(vals[1:] < vals[:-1] * (1 - 1e-12))[0]
    if drop.size:
        i = int(drop[0])
        diags.append(Diagnostic("monotone", False, (float(probe[i]), float(probe[i + 1]))))
    else:
        diags.append(Diagnostic("monotone", True))
    witness = None
    for step in (1, 4, 16, 48):
        a, b = probe[:-step], probe[step:]
        mid = np.asarray(evaluate(ast, 0.5 * (a + b)))
        fa, fb = vals[:-step], vals[step:]
        with np.errstate(invalid="ignore"):
            chord = 0.5 * (fa + fb)
            bad = np.isfinite(chord) & (mid > chord * (1 + 1e-9) + 1e-300)
        if np.any(bad):
            i = int(np.argmax(bad))
            witness = (float(a[i]), float(b[i]))
            break
    diags.append(Diagnostic("convex", witness is None, witness or ()))
    diags.extend(_branch_continuity(ast))
    return diags


def validate_kernel(ast, probe=None) -> list[Diagnostic]:
    """Check positivity and finiteness on ``probe``."""
    probe = np.sort(np.asarray(_default_probe() if probe is None else probe, dtype=float))
    try:
        vals = np.asarray(evaluate(ast, probe))
    except DslDomainError as exc:
        return [Diagnostic("evaluation", False, (), str(exc))]
    diags = []
    bad = ~(vals > 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        diags.append(Diagnostic("positive", False, (float(probe[i]), float(vals[i]))))
    else:
        diags.append(Diagnostic("positive", True))
    inf = np.isinf(vals)
    if np.any(inf):
        i = int(np.argmax(inf))
        diags.append(Diagnostic("finite", False, (float(probe[i]),)))
    else:
        diags.append(Diagnostic("finite", True))
    diags.extend(_branch_continuity(ast))
    return diags

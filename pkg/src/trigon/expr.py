"""Expression language for triangle inequalities.

Grammar (whitespace insignificant)::

    ineq   := expr (">=" | "<=") expr
    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := base ("^" (number | "t"))?
    base   := number | symbol | func "(" expr ")" | "(" expr ")" | "-" base
    func   := sqrt | cbrt | abs | tan | sin | cos | arccos | cyc

``cyc(e)`` is the cyclic sum of ``e`` over the rotation a -> b -> c -> a
(and the matching rotation of vertex-indexed symbols).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

TRIANGLE = "triangle"
TRIPLE = "positive-triple"
DOMAINS = (TRIANGLE, TRIPLE)

TRIANGLE_SYMBOLS = frozenset(
    "a b c s S R r r_a r_b r_c h_a h_b h_c A B C".split()
)
TRIPLE_SYMBOLS = frozenset("x y z t".split())
DOMAIN_SYMBOLS = {TRIANGLE: TRIANGLE_SYMBOLS, TRIPLE: TRIPLE_SYMBOLS}

FUNCTIONS = ("sqrt", "cbrt", "abs", "tan", "sin", "cos", "arccos", "cyc")
UNARY_OPS = ("neg", "sqrt", "cbrt", "abs", "tan", "sin", "cos", "arccos")
BINARY_OPS = ("+", "-", "*", "/", "^")
RELATIONS = (">=", "<=")

_ROTATION = {
    "a": "b", "b": "c", "c": "a",
    "A": "B", "B": "C", "C": "A",
    "r_a": "r_b", "r_b": "r_c", "r_c": "r_a",
    "h_a": "h_b", "h_b": "h_c", "h_c": "h_a",
    "x": "y", "y": "z", "z": "x",
}

INHOMOGENEOUS = "inhomogeneous"
INDETERMINATE = "indeterminate"


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class LexError(ParseError):
    pass


class EvaluationError(ExprError):
    pass


# --- AST --------------------------------------------------------------------

@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Cyc:
    child: "Node"


Node = Union[Number, Symbol, Unary, Binary, Cyc]


@dataclass(frozen=True)
class InequalityDef:
    name: str
    domain: str
    lhs: Node
    rel: str
    rhs: Node
    inhomogeneous: bool = False

    def text(self) -> str:
        return f"{serialize(self.lhs)} {self.rel} {serialize(self.rhs)}"

    def favored(self):
        """(larger side, smaller side) as the relation claims."""
        return (self.lhs, self.rhs) if self.rel == ">=" else (self.rhs, self.lhs)


# --- lexer ------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>>=|<=|[-+*/^()])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int  # 1-based column


def tokenize(text: str) -> List[Token]:
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise LexError(f"unexpected character {text[i]!r}", i + 1)
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), i + 1))
        i = m.end()
    tokens.append(Token("end", "", len(text) + 1))
    return tokens


# --- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, domain: str):
        if domain not in DOMAINS:
            raise ParseError(f"unknown domain {domain!r}")
        self.tokens = tokenize(text)
        self.i = 0
        self.domain = domain
        self.cyc_depth = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        if self.tok.text != text:
            self.fail([repr(text)])
        return self.advance()

    def fail(self, expected):
        got = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
        raise ParseError(f"syntax error: expected {' or '.join(expected)}, got {got}", self.tok.pos)

    def expr(self) -> Node:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.tok.text == "^":
            self.advance()
            if self.tok.kind == "num":
                node = Binary("^", node, Number(float(self.advance().text)))
            elif self.tok.text == "t" and self.domain == TRIPLE:
                self.advance()
                node = Binary("^", node, Symbol("t"))
            else:
                self.fail(["number"] + (["'t'"] if self.domain == TRIPLE else []))
        return node

    def base(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Number(float(tok.text))
        if tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.text == "-":
            self.advance()
            return Unary("neg", self.base())
        if tok.kind == "ident":
            if tok.text in FUNCTIONS:
                self.advance()
                self.expect("(")
                if tok.text == "cyc":
                    if self.cyc_depth:
                        raise ParseError("cyc() may not be nested", tok.pos)
                    self.cyc_depth += 1
                    child = self.expr()
                    self.cyc_depth -= 1
                    node = Cyc(child)
                else:
                    node = Unary(tok.text, self.expr())
                self.expect(")")
                return node
            if tok.text not in DOMAIN_SYMBOLS[self.domain]:
                raise ParseError(f"unknown symbol {tok.text!r} for domain {self.domain}", tok.pos)
            self.advance()
            return Symbol(tok.text)
        self.fail(["number", "symbol", "function", "'('", "'-'"])

    def end(self):
        if self.tok.kind != "end":
            self.fail(["end of input"])


def parse_expr(text: str, domain: str = TRIANGLE) -> Node:
    p = _Parser(text, domain)
    node = p.expr()
    p.end()
    return node


def parse_inequality(text: str, domain: str = TRIANGLE, name: str = "", inhomogeneous: bool = False) -> InequalityDef:
    p = _Parser(text, domain)
    lhs = p.expr()
    if p.tok.text not in RELATIONS:
        p.fail(["'>='", "'<='"])
    rel = p.advance().text
    rhs = p.expr()
    p.end()
    return InequalityDef(name, domain, lhs, rel, rhs, inhomogeneous)


def parse(text: str, domain: str = TRIANGLE, name: str = "") -> Union[InequalityDef, Node]:
    """Parse an inequality if ``text`` has a relation, else a bare expression."""
    kinds = [t.text for t in tokenize(text)]
    if any(k in RELATIONS for k in kinds):
        return parse_inequality(text, domain, name)
    return parse_expr(text, domain)


# --- serialization ----------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_BASE_PREC = 4


def _prec(node: Node) -> int:
    return _PREC[node.op] if isinstance(node, Binary) else _BASE_PREC


def _fmt_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _wrap(node: Node, min_prec: int) -> str:
    text = serialize(node)
    return f"({text})" if _prec(node) < min_prec else text


def serialize(node: Union[Node, InequalityDef]) -> str:
    if isinstance(node, InequalityDef):
        return node.text()
    if isinstance(node, Number):
        return _fmt_number(node.value)
    if isinstance(node, Symbol):
        return node.name
    if isinstance(node, Cyc):
        return f"cyc({serialize(node.child)})"
    if isinstance(node, Unary):
        if node.op == "neg":
            return "-" + _wrap(node.child, _BASE_PREC)
        return f"{node.op}({serialize(node.child)})"
    if isinstance(node, Binary):
        if node.op in ("+", "-"):
            return f"{_wrap(node.left, 1)} {node.op} {_wrap(node.right, 2)}"
        if node.op in ("*", "/"):
            return f"{_wrap(node.left, 2)}{node.op}{_wrap(node.right, 3)}"
        return f"{_wrap(node.left, _BASE_PREC)}^{serialize(node.right)}"
    raise TypeError(f"not an expression node: {node!r}")


# --- cyclic expansion -------------------------------------------------------

def _rotate(node: Node) -> Node:
    if isinstance(node, Symbol):
        return Symbol(_ROTATION.get(node.name, node.name))
    if isinstance(node, Unary):
        return Unary(node.op, _rotate(node.child))
    if isinstance(node, Binary):
        return Binary(node.op, _rotate(node.left), _rotate(node.right))
    if isinstance(node, Cyc):
        return Cyc(_rotate(node.child))
    return node


@lru_cache(maxsize=4096)
def expand_cyc(node: Node) -> Node:
    """Replace every ``cyc(e)`` by ``e + rot(e) + rot(rot(e))``."""
    if isinstance(node, Cyc):
        e = expand_cyc(node.child)
        e1 = _rotate(e)
        return Binary("+", Binary("+", e, e1), _rotate(e1))
    if isinstance(node, Unary):
        return Unary(node.op, expand_cyc(node.child))
    if isinstance(node, Binary):
        return Binary(node.op, expand_cyc(node.left), expand_cyc(node.right))
    return node


def symbols(node: Node) -> set:
    if isinstance(node, Symbol):
        return {node.name}
    if isinstance(node, (Unary, Cyc)):
        return symbols(node.child)
    if isinstance(node, Binary):
        return symbols(node.left) | symbols(node.right)
    return set()


# --- evaluation -------------------------------------------------------------

Bindings = Mapping[str, Union[float, np.ndarray]]


def _check(value, what):
    if not np.all(np.isfinite(value)):
        raise EvaluationError(f"non-finite value from {what}")
    return value


def _eval(node: Node, env: Bindings):
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Symbol):
        try:
            return env[node.name]
        except KeyError:
            raise EvaluationError(f"unbound symbol {node.name!r}") from None
    if isinstance(node, Unary):
        v = _eval(node.child, env)
        op = node.op
        if op == "neg":
            return -v
        if op == "sqrt":
            if np.any(v < 0):
                raise EvaluationError("square root of a negative number")
            return np.sqrt(v)
        if op == "cbrt":
            return np.cbrt(v)
        if op == "abs":
            return np.abs(v)
        if op == "arccos":
            if np.any(np.abs(v) > 1):
                raise EvaluationError("arccos argument outside [-1, 1]")
            return np.arccos(v)
        return _check(getattr(np, op)(v), op)
    if isinstance(node, Binary):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        op = node.op
        if op == "+":
            return _check(left + right, "+")
        if op == "-":
            return _check(left - right, "-")
        if op == "*":
            return _check(left * right, "*")
        if op == "/":
            if np.any(right == 0):
                raise EvaluationError("division by zero")
            return _check(left / right, "/")
        if op == "^":
            if np.any(np.asarray(left) < 0) and not float(right).is_integer():
                raise EvaluationError("fractional power of a negative number")
            if float(right) < 0 and np.any(np.asarray(left) == 0):
                raise EvaluationError("division by zero")
            with np.errstate(over="ignore"):
                return _check(np.power(left, right), "^")
    if isinstance(node, Cyc):
        return _eval(expand_cyc(node), env)
    raise TypeError(f"not an expression node: {node!r}")


def _as_env(bindings, t=None) -> Dict[str, object]:
    if hasattr(bindings, "bindings"):
        env = dict(bindings.bindings())
    elif isinstance(bindings, Mapping):
        env = dict(bindings)
    else:
        x, y, z = bindings
        env = {"x": x, "y": y, "z": z}
    if t is not None:
        env["t"] = t
    return env


class Compiled:
    """An expression with its cyclic sums expanded once, for repeated evaluation."""

    __slots__ = ("node", "expanded")

    def __init__(self, node: Node):
        self.node = node
        self.expanded = expand_cyc(node)

    def __call__(self, bindings, t: Optional[float] = None):
        env = _as_env(bindings, t)
        with np.errstate(all="ignore"):
            value = _eval(self.expanded, env)
        _check(value, "expression")
        if np.ndim(value) == 0:
            return float(value)
        return np.asarray(value, dtype=float)


def evaluate(node: Node, bindings, t: Optional[float] = None):
    """Evaluate ``node`` on a symbol table.

    ``bindings`` is a :class:`~trigon.triangle.DerivedQuantities`, a mapping of
    symbol names to floats or numpy arrays, or an ``(x, y, z)`` triple.
    Results have the shape of the bound values; a float for scalar input.
    """
    return Compiled(node)(bindings, t)


# --- homogeneity ------------------------------------------------------------

_PROBE_ATTEMPTS = 8
_PROBE_TOL = 1e-9


def _probe_env(domain, rng, scale, t):
    from .triangle import derive_arrays

    if domain == TRIANGLE:
        w = rng.dirichlet([2.0, 2.0, 2.0], size=3)
        m, n, p = w.T
        return derive_arrays(scale * (n + p), scale * (p + m), scale * (m + n))
    xyz = np.exp(rng.uniform(-1.0, 1.0, size=(3, 3)))
    env = {"x": scale * xyz[:, 0], "y": scale * xyz[:, 1], "z": scale * xyz[:, 2]}
    if t is not None:
        env["t"] = t
    return env


def _snap(deg: float) -> float:
    snapped = round(deg * 12) / 12
    return snapped if abs(snapped - deg) <= _PROBE_TOL else deg


def homogeneity_degree(node: Node, domain: str = TRIANGLE, t: Optional[float] = None, seed: int = 0x5EED):
    """Degree ``d`` with f(2 x) = 2^d f(x), found by numeric probing.

    Returns a float, or :data:`INHOMOGENEOUS` when the probes disagree, or
    :data:`INDETERMINATE` when the expression keeps vanishing (or failing)
    at the probe points.
    """
    rng = np.random.default_rng(seed)
    for _ in range(_PROBE_ATTEMPTS):
        state = rng.bit_generator.state
        try:
            f1 = np.atleast_1d(evaluate(node, _probe_env(domain, rng, 1.0, t)))
            rng.bit_generator.state = state
            f2 = np.atleast_1d(evaluate(node, _probe_env(domain, rng, 2.0, t)))
        except EvaluationError:
            continue
        if np.any(f1 == 0) or np.any(f2 == 0):
            continue
        ratio = f2 / f1
        if np.any(ratio <= 0):
            return INHOMOGENEOUS
        degs = np.log2(ratio)
        if np.ptp(degs) > _PROBE_TOL:
            return INHOMOGENEOUS
        return _snap(float(np.mean(degs)))
    return INDETERMINATE


def inequality_degree(defn: InequalityDef, t: Optional[float] = None):
    """Common degree of both sides, or INHOMOGENEOUS / INDETERMINATE."""
    dl = homogeneity_degree(defn.lhs, defn.domain, t)
    dr = homogeneity_degree(defn.rhs, defn.domain, t)
    if INHOMOGENEOUS in (dl, dr):
        return INHOMOGENEOUS
    if dl == INDETERMINATE:
        return dr
    if dr == INDETERMINATE:
        return dl
    return dl if abs(dl - dr) <= _PROBE_TOL else INHOMOGENEOUS


# --- definition files -------------------------------------------------------

def format_definition(defn: InequalityDef) -> str:
    return f"{defn.name} : {defn.domain} : {defn.text()}"


def parse_definition_line(line: str, lineno: int = 0) -> Optional[InequalityDef]:
    """Parse ``id : domain : expr REL expr``; None for blank/comment lines."""
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    parts = [p.strip() for p in body.split(":", 2)]
    where = f"line {lineno}: " if lineno else ""
    if len(parts) != 3:
        raise ParseError(f"{where}expected 'id : domain : inequality'")
    name, domain, text = parts
    if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9\-]*", name):
        raise ParseError(f"{where}invalid id {name!r}")
    if domain not in DOMAINS:
        raise ParseError(f"{where}unknown domain {domain!r}")
    try:
        return parse_inequality(text, domain, name)
    except ParseError as exc:
        raise ParseError(f"{where}{exc}") from exc


def parse_definitions(text: str) -> List[Tuple[int, InequalityDef]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        defn = parse_definition_line(line, lineno)
        if defn is not None:
            out.append((lineno, defn))
    return out

"""Scalar expressions in one variable: parser, evaluator, renderer.

Grammar (standard precedence, whitespace insensitive):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative, binds above '-'
    atom    := NUMBER | 'x' | CONSTANT | FUNC '(' expr ')' | '(' expr ')'

Functions: exp, log, sqrt, sin, cos, tan, abs. Constants: pi, e.
No implicit multiplication, no user functions, no second variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnknownSymbol

_FUNCTIONS = {
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "abs": abs,
}

_CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
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


Node = Num | Var | Const | Neg | BinOp | Call


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        self._scan()
        self.idx = 0

    def _scan(self):
        text = self.text
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            if ch in "+-*/^()":
                self.tokens.append(("op", ch, i))
                i += 1
                continue
            if ch.isdigit() or ch == ".":
                j = i
                seen_e = False
                while j < len(text):
                    c = text[j]
                    if c.isdigit() or c == ".":
                        j += 1
                    elif c in "eE" and not seen_e and j + 1 < len(text) and (
                            text[j + 1].isdigit() or text[j + 1] in "+-"):
                        seen_e = True
                        j += 2 if text[j + 1] in "+-" else 1
                    else:
                        break
                lit = text[i:j]
                try:
                    float(lit)
                except ValueError:
                    raise ExprSyntaxError(f"bad numeric literal {lit!r}", i)
                self.tokens.append(("num", lit, i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.tokens.append(("name", text[i:j], i))
                i = j
                continue
            raise ExprSyntaxError(f"unexpected character {ch!r}", i)

    def peek(self):
        if self.idx < len(self.tokens):
            return self.tokens[self.idx]
        return ("eof", "", len(self.text))

    def next(self):
        tok = self.peek()
        self.idx += 1
        return tok


class _Parser:
    def __init__(self, text: str):
        self.toks = _Tokenizer(text)

    def parse(self) -> Node:
        node = self._expr()
        kind, val, off = self.toks.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return node

    def _expr(self) -> Node:
        node = self._term()
        while True:
            kind, val, _ = self.toks.peek()
            if kind == "op" and val in "+-":
                self.toks.next()
                node = BinOp(val, node, self._term())
            else:
                return node

    def _term(self) -> Node:
        node = self._unary()
        while True:
            kind, val, _ = self.toks.peek()
            if kind == "op" and val in "*/":
                self.toks.next()
                node = BinOp(val, node, self._unary())
            else:
                return node

    def _unary(self) -> Node:
        kind, val, _ = self.toks.peek()
        if kind == "op" and val == "-":
            self.toks.next()
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Node:
        base = self._atom()
        kind, val, _ = self.toks.peek()
        if kind == "op" and val == "^":
            self.toks.next()
            # right-associative; unary minus is allowed in the exponent
            return BinOp("^", base, self._unary())
        return base

    def _atom(self) -> Node:
        kind, val, off = self.toks.next()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "x":
                return Var()
            if val in _CONSTANTS:
                return Const(val)
            if val in _FUNCTIONS:
                k2, v2, o2 = self.toks.next()
                if (k2, v2) != ("op", "("):
                    raise ExprSyntaxError(f"expected '(' after {val!r}", o2)
                arg = self._expr()
                k3, v3, o3 = self.toks.next()
                if (k3, v3) != ("op", ")"):
                    raise ExprSyntaxError("expected ')'", o3)
                return Call(val, arg)
            raise UnknownSymbol(f"unknown identifier {val!r} at offset {off}")
        if (kind, val) == ("op", "("):
            node = self._expr()
            k2, v2, o2 = self.toks.next()
            if (k2, v2) != ("op", ")"):
                raise ExprSyntaxError("expected ')'", o2)
            return node
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", off)


def _eval_node(node: Node, x: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return _CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_eval_node(node.operand, x)
    if isinstance(node, Call):
        arg = _eval_node(node.arg, x)
        try:
            out = _FUNCTIONS[node.func](arg)
        except (ValueError, OverflowError) as exc:
            raise EvalDomainError(f"{node.func}({arg!r}): {exc}") from None
        return out
    if isinstance(node, BinOp):
        a = _eval_node(node.left, x)
        b = _eval_node(node.right, x)
        try:
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                return a / b
            if node.op == "^":
                if a < 0 and b != round(b):
                    raise EvalDomainError(
                        f"negative base {a!r} with non-integer exponent {b!r}")
                return math.pow(a, b)
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise EvalDomainError(f"{node.op} failed: {exc}") from None
    raise TypeError(f"bad node {node!r}")


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _render(node: Node, parent_prec: int = 0) -> str:
    if isinstance(node, Num):
        v = node.value
        return format(v, ".17g")
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({_render(node.arg, 0)})"
    if isinstance(node, Neg):
        inner = _render(node.operand, _PRECEDENCE["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PRECEDENCE["neg"] else text
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        # left operand of ^ must re-parenthesize at equal precedence
        # (right-assoc); for - and / the right side must as well.
        left = _render(node.left, prec + 1 if node.op == "^" else prec)
        right = _render(node.right,
                        prec if node.op == "^" else prec + 1)
        text = f"{left} {node.op} {right}"
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"bad node {node!r}")


class Expression:
    """Immutable parsed expression; evaluation is pure and thread-safe."""

    __slots__ = ("root", "source")

    def __init__(self, root: Node, source: str):
        self.root = root
        self.source = source

    def __call__(self, x: float) -> float:
        value = _eval_node(self.root, float(x))
        if not math.isfinite(value):
            raise EvalDomainError(f"non-finite value {value!r} at x={x!r}")
        return value

    def render(self) -> str:
        return _render(self.root)

    def __repr__(self):
        return f"Expression({self.render()!r})"


def parse(text: str) -> Expression:
    """Parse expression text. Raises ExprSyntaxError or UnknownSymbol."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return Expression(_Parser(text).parse(), text)


def eval_vector(expr: Expression, grid) -> np.ndarray:
    """Evaluate an expression at every grid node.

    Raises EvalDomainError carrying the index of the first offending node.
    """
    x = np.asarray(grid.x if hasattr(grid, "x") else grid, dtype=np.float64)
    out = np.empty(x.size)
    for k, xk in enumerate(x):
        try:
            out[k] = expr(xk)
        except EvalDomainError as exc:
            raise EvalDomainError(str(exc), node_index=k) from None
    return out

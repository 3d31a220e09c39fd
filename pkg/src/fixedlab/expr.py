"""Arithmetic expressions over one or two real variables.

Maps, metrics, and comparison functions are all defined by small expressions
in this dialect:

    expr    := term (("+"|"-") term)*
    term    := factor (("*"|"/") factor)*
    factor  := unary ("^" factor)?          # ^ is right-associative
    unary   := "-" unary | primary
    primary := NUMBER | VAR | IDENT "(" args ")" | "(" expr ")"

Variables are ``x`` (always) and ``y`` (two-variable expressions only).
Functions: ``abs/1``, ``sqrt/1``, ``min/2``, ``max/2``, ``pow/2`` and
``if/3`` whose first argument is a single comparison ``expr RELOP expr``
with RELOP one of ``<  <=  >  >=``.  Note that per the grammar above unary
minus binds tighter than ``^``, so ``-x^2`` parses as ``(-x)^2``.

Comparisons use exact binary64 ordering, so piecewise definitions built
with ``if`` follow half-open intervals precisely: ``x < 0.5`` is false at
``x = 0.5``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

from .errors import ExprSyntaxError, ValidationError

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Cmp",
    "If",
    "Node",
    "parse",
    "to_source",
    "describe_node",
]


@dataclass(frozen=True)
class Num:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str  # abs, sqrt, min, max, pow
    args: tuple
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Cmp:
    op: str  # < <= > >=
    left: "Node"
    right: "Node"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Cmp
    then: "Node"
    orelse: "Node"
    offset: int = field(default=0, compare=False)


Node = Union[Num, Var, Neg, BinOp, Call, Cmp, If]

_FUNCTION_ARITY = {"abs": 1, "sqrt": 1, "min": 2, "max": 2, "pow": 2, "if": 3}

_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", "op", "eof"
    text: str
    pos: int  # 1-based byte offset


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            m = _NUMBER_RE.match(src, i)
            tokens.append(_Token("num", m.group(0), i + 1))
            i = m.end()
            continue
        if ch.isalpha() or ch == "_":
            m = _IDENT_RE.match(src, i)
            tokens.append(_Token("ident", m.group(0), i + 1))
            i = m.end()
            continue
        if ch in "<>" and i + 1 < n and src[i + 1] == "=":
            tokens.append(_Token("op", src[i : i + 2], i + 1))
            i += 2
            continue
        if ch in "+-*/^()<>,":
            tokens.append(_Token("op", ch, i + 1))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i + 1, "a valid token")
    tokens.append(_Token("eof", "", n + 1))
    return tokens


class _Parser:
    def __init__(self, src: str, arity: int):
        self.tokens = _tokenize(src)
        self.pos = 0
        self.arity = arity

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def accept_op(self, *ops: str) -> _Token | None:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ops:
            return self.advance()
        return None

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            raise ExprSyntaxError("syntax error", tok.pos, f"'{op}'")
        return self.advance()

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while True:
            tok = self.accept_op("+", "-")
            if tok is None:
                return node
            right = self.parse_term()
            node = BinOp(tok.text, node, right, tok.pos)

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while True:
            tok = self.accept_op("*", "/")
            if tok is None:
                return node
            right = self.parse_factor()
            node = BinOp(tok.text, node, right, tok.pos)

    def parse_factor(self) -> Node:
        node = self.parse_unary()
        tok = self.accept_op("^")
        if tok is not None:
            right = self.parse_factor()  # right-associative
            node = BinOp("^", node, right, tok.pos)
        return node

    def parse_unary(self) -> Node:
        tok = self.accept_op("-")
        if tok is not None:
            return Neg(self.parse_unary(), tok.pos)
        return self.parse_primary()

    def parse_primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(
                    f"number literal {tok.text!r} overflows binary64", tok.pos, "a finite number"
                )
            return Num(value, tok.pos)
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name in ("x", "y"):
                if name == "y" and self.arity == 1:
                    raise ExprSyntaxError(
                        "variable 'y' is not allowed in a one-variable expression",
                        tok.pos,
                        "'x'",
                    )
                return Var(name, tok.pos)
            if name in _FUNCTION_ARITY:
                return self.parse_call(name, tok.pos)
            raise ExprSyntaxError(
                f"unknown identifier {name!r}", tok.pos, "a variable or function name"
            )
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(
            "syntax error",
            tok.pos,
            "a primary (number, variable, function call, or '(')",
        )

    def parse_call(self, name: str, pos: int) -> Node:
        self.expect_op("(")
        if name == "if":
            cond = self.parse_comparison()
            self.expect_op(",")
            then = self.parse_expr()
            self.expect_op(",")
            orelse = self.parse_expr()
            self.expect_op(")")
            return If(cond, then, orelse, pos)
        args = [self.parse_expr()]
        while self.accept_op(","):
            args.append(self.parse_expr())
        self.expect_op(")")
        want = _FUNCTION_ARITY[name]
        if len(args) != want:
            raise ExprSyntaxError(
                f"{name} takes {want} argument{'s' if want > 1 else ''}, got {len(args)}",
                pos,
                f"{want} argument{'s' if want > 1 else ''}",
            )
        return Call(name, tuple(args), pos)

    def parse_comparison(self) -> Cmp:
        left = self.parse_expr()
        tok = self.accept_op("<", "<=", ">", ">=")
        if tok is None:
            bad = self.peek()
            raise ExprSyntaxError(
                "syntax error", bad.pos, "a comparison operator (<, <=, >, >=)"
            )
        right = self.parse_expr()
        return Cmp(tok.text, left, right, tok.pos)


def parse(src: str, arity: int = 1) -> Node:
    """Parse ``src`` into an AST.

    ``arity`` is 1 for maps and comparison functions (variable ``x``) and
    2 for metrics (variables ``x`` and ``y``).  Raises :class:`ExprSyntaxError`
    with a 1-based byte offset on malformed input.
    """
    if arity not in (1, 2):
        raise ValidationError("arity must be 1 or 2")
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 1, "an expression")
    parser = _Parser(src, arity)
    node = parser.parse_expr()
    tail = parser.peek()
    if tail.kind != "eof":
        raise ExprSyntaxError("trailing input", tail.pos, "end of expression")
    return node


# Printing. Levels follow the grammar: +,- (1) < *,/ (2) < ^ (3) < unary
# minus (4) < primaries (5). A child is parenthesized when its level is
# below what its position requires, which makes parse(to_source(ast)) == ast.

def _level(node: Node) -> int:
    if isinstance(node, BinOp):
        if node.op in "+-":
            return 1
        if node.op in "*/":
            return 2
        return 3  # ^
    if isinstance(node, Neg):
        return 4
    return 5


def format_float(value: float) -> str:
    """Shortest decimal string that parses back to the same binary64 value."""
    text = repr(float(value))
    if text.endswith(".0"):
        text = text[:-2]
    return text


def _render(node: Node, min_level: int) -> str:
    if isinstance(node, Num):
        text = format_float(node.value)
    elif isinstance(node, Var):
        text = node.name
    elif isinstance(node, Neg):
        text = "-" + _render(node.operand, 4)
    elif isinstance(node, BinOp):
        if node.op == "^":
            text = _render(node.left, 4) + "^" + _render(node.right, 3)
        elif node.op in "*/":
            text = _render(node.left, 2) + node.op + _render(node.right, 3)
        else:
            text = _render(node.left, 1) + node.op + _render(node.right, 2)
    elif isinstance(node, Call):
        text = node.func + "(" + ", ".join(_render(a, 1) for a in node.args) + ")"
    elif isinstance(node, If):
        cond = _render(node.cond.left, 1) + node.cond.op + _render(node.cond.right, 1)
        text = f"if({cond}, {_render(node.then, 1)}, {_render(node.orelse, 1)})"
    else:  # pragma: no cover
        raise TypeError(f"unexpected node {node!r}")
    if _level(node) < min_level:
        return "(" + text + ")"
    return text


def to_source(node: Node) -> str:
    """Render the canonical textual form of an AST."""
    return _render(node, 1)


def describe_node(node: Node) -> str:
    """Short human label for error messages, e.g. ``'/' at offset 4``."""
    if isinstance(node, BinOp):
        head = f"'{node.op}'"
    elif isinstance(node, Neg):
        head = "unary '-'"
    elif isinstance(node, Call):
        head = f"'{node.func}'"
    elif isinstance(node, Num):
        head = f"number {format_float(node.value)}"
    elif isinstance(node, Var):
        head = f"variable {node.name}"
    else:
        head = type(node).__name__.lower()
    if node.offset:
        return f"{head} at offset {node.offset}"
    return head

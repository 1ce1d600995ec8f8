"""Small closed-form expression language for scenario data.

Grammar (one free variable, typically x for spatial data or w for
boundary trace laws):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' factor)?
    atom   := number | ident | '(' expr ')' | func '(' expr ')'

'^' is right-associative and binds tighter than unary minus, so
-2^2 evaluates to -4.  Known names: the declared variable, pi, and the
functions sin, cos, exp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

FUNCTIONS = {"sin": math.sin, "cos": math.cos, "exp": math.exp}


class ExpressionError(ValueError):
    pass


class ExpressionSyntaxError(ExpressionError):
    """Malformed input; `offset` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifier(ExpressionError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} (at offset {offset})")
        self.name = name
        self.offset = offset


class DivisionByZero(ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Pi:
    pass


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
    func: str
    arg: "Node"


Node = Union[Num, Var, Pi, Neg, BinOp, Call]


@dataclass(frozen=True)
class Expression:
    """Parsed expression in one free variable."""

    root: Node
    variable: str

    def __call__(self, value: float) -> float:
        return _eval(self.root, float(value))

    def format(self) -> str:
        return _format(self.root)


# --- tokenizer -------------------------------------------------------------

_OPERATORS = set("+-*/^()")


def _tokenize(text: str):
    """Yield (kind, value, offset) triples; kind in {num, ident, op}."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPERATORS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            try:
                value = float(text[i:j])
            except ValueError:
                raise ExpressionSyntaxError(f"bad number {text[i:j]!r}", i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(("eof", None, n))
    return tokens


class _Parser:
    def __init__(self, tokens, variable: str):
        self.tokens = tokens
        self.pos = 0
        self.variable = variable

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, value, offset = self.peek()
        if kind != "op" or value != op:
            raise ExpressionSyntaxError(f"expected {op!r}", offset)
        return self.advance()

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.parse_term())
            else:
                return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.parse_factor())
            else:
                return node

    def parse_factor(self) -> Node:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.parse_factor())
        node = self.parse_atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return BinOp("^", node, self.parse_factor())
        return node

    def parse_atom(self) -> Node:
        kind, value, offset = self.advance()
        if kind == "num":
            return Num(value)
        if kind == "op" and value == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.parse_expr()
                self.expect_op(")")
                return Call(value, arg)
            if value == "pi":
                return Pi()
            if value == self.variable:
                return Var(value)
            raise UnknownIdentifier(value, offset)
        raise ExpressionSyntaxError("expected a number, name, or '('", offset)


def parse(text: str, variable: str = "x") -> Expression:
    """Parse `text` into an Expression over the given free variable."""
    parser = _Parser(_tokenize(text), variable)
    root = parser.parse_expr()
    kind, _, offset = parser.peek()
    if kind != "eof":
        raise ExpressionSyntaxError("trailing input", offset)
    return Expression(root, variable)


# --- evaluation and printing ------------------------------------------------


def _eval(node: Node, value: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return value
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Neg):
        return -_eval(node.arg, value)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, value))
    if isinstance(node, BinOp):
        a = _eval(node.left, value)
        b = _eval(node.right, value)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if b == 0.0:
                raise DivisionByZero(f"division by zero: {_format(node)}")
            return a / b
        try:
            return a ** b
        except ZeroDivisionError:
            raise DivisionByZero(f"zero raised to negative power: {_format(node)}") from None
    raise TypeError(f"unexpected node {node!r}")


def evaluate(expr: Expression, value: float) -> float:
    return expr(value)


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _format(node: Node, parent_prec: int = 0) -> str:
    if isinstance(node, Num):
        return repr(node.value) if node.value != int(node.value) else str(int(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Neg):
        inner = _format(node.arg, 3)
        text = f"-{inner}"
        return f"({text})" if parent_prec > 3 else text
    if isinstance(node, Call):
        return f"{node.func}({_format(node.arg)})"
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        # left operand needs same precedence; right gets prec+1 except '^'
        left = _format(node.left, prec if node.op != "^" else prec + 1)
        right = _format(node.right, prec + 1 if node.op != "^" else prec)
        text = f"{left}{node.op}{right}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"unexpected node {node!r}")

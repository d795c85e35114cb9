"""Attribute-update expressions for rule right-hand sides.

Grammar::

    expr   := add
    add    := mul (('+' | '-') mul)*
    mul    := unary (('*' | '/') unary)*
    unary  := '-' unary | atom
    atom   := literal
            | ident '.' 'property' '(' string ')'
            | ('max' | 'min') '(' expr ',' expr ')'
            | 'random' '(' expr ')'
            | '(' expr ')'

Literals are numbers, ``true``/``false`` or double-quoted strings. An
``ident`` names an element bound by the rule being applied; ``random(X)``
draws uniformly from the half-open interval (0, X].
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .errors import ExpressionError, ParseError
from .graph import Record, kind_of


@dataclass(frozen=True, slots=True)
class Lit:
    value: object


@dataclass(frozen=True, slots=True)
class Prop:
    ident: str
    attr: str


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class Call:
    fn: str  # max | min | random
    args: tuple["Expr", ...]


Expr = Lit | Prop | BinOp | Call


# -- evaluation ---------------------------------------------------------

def _numeric(value, what: str):
    kind = kind_of(value)
    if kind not in ("int", "real"):
        raise ExpressionError(f"{what} needs a numeric value, got {kind}", code="EXPR_KIND")
    return value


def evaluate(expr: Expr, bindings: Mapping[str, Record], rng) -> object:
    """Evaluate against pre-application records; pure except for rng draws."""
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Prop):
        record = bindings.get(expr.ident)
        if record is None:
            raise ExpressionError(f"unbound element {expr.ident!r}", code="EXPR_UNBOUND")
        if expr.attr not in record:
            raise ExpressionError(
                f"element {expr.ident!r} has no property {expr.attr!r}", code="EXPR_ABSENT")
        return record.get(expr.attr)
    if isinstance(expr, BinOp):
        left = _numeric(evaluate(expr.left, bindings, rng), f"operator {expr.op!r}")
        right = _numeric(evaluate(expr.right, bindings, rng), f"operator {expr.op!r}")
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if right == 0:
                raise ExpressionError("division by zero", code="EXPR_DIV_ZERO")
            return left / right
        raise ExpressionError(f"unknown operator {expr.op!r}")
    if isinstance(expr, Call):
        if expr.fn == "random":
            x = _numeric(evaluate(expr.args[0], bindings, rng), "random")
            if x <= 0:
                raise ExpressionError("random(X) needs X > 0", code="EXPR_RANDOM")
            # (0, X]: rng.random() is in [0, 1)
            return x * (1.0 - rng.random())
        a = _numeric(evaluate(expr.args[0], bindings, rng), expr.fn)
        b = _numeric(evaluate(expr.args[1], bindings, rng), expr.fn)
        return max(a, b) if expr.fn == "max" else min(a, b)
    raise ExpressionError(f"unknown expression node {expr!r}")


def referenced_idents(expr: Expr) -> set[str]:
    if isinstance(expr, Prop):
        return {expr.ident}
    if isinstance(expr, BinOp):
        return referenced_idents(expr.left) | referenced_idents(expr.right)
    if isinstance(expr, Call):
        out: set[str] = set()
        for arg in expr.args:
            out |= referenced_idents(arg)
        return out
    return set()


def uses_random(expr: Expr) -> bool:
    if isinstance(expr, Call):
        return expr.fn == "random" or any(uses_random(a) for a in expr.args)
    if isinstance(expr, BinOp):
        return uses_random(expr.left) or uses_random(expr.right)
    return False


# -- parsing ------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<real>\d+\.\d*(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<sym>[().,+\-*/])
""", re.VERBOSE)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", offset=pos)
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        tokens.append((m.lastgroup, m.group(), m.start()))
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, off = self.next()
        if text != value:
            raise ParseError(f"expected {value!r}, got {text or 'end of input'!r}", offset=off)

    def parse(self) -> Expr:
        expr = self.add()
        kind, text, off = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {text!r} after expression", offset=off)
        return expr

    def add(self) -> Expr:
        expr = self.mul()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            expr = BinOp(op, expr, self.mul())
        return expr

    def mul(self) -> Expr:
        expr = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            expr = BinOp(op, expr, self.unary())
        return expr

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.next()
            inner = self.unary()
            if isinstance(inner, Lit) and kind_of(inner.value) in ("int", "real"):
                return Lit(-inner.value)
            return BinOp("-", Lit(0), inner)
        return self.atom()

    def atom(self) -> Expr:
        kind, text, off = self.next()
        if kind == "int":
            return Lit(int(text))
        if kind == "real":
            return Lit(float(text))
        if kind == "string":
            return Lit(_unquote(text))
        if text == "(":
            expr = self.add()
            self.expect(")")
            return expr
        if kind == "ident":
            if text in ("true", "false"):
                return Lit(text == "true")
            if text in ("max", "min"):
                self.expect("(")
                a = self.add()
                self.expect(",")
                b = self.add()
                self.expect(")")
                return Call(text, (a, b))
            if text == "random":
                self.expect("(")
                x = self.add()
                self.expect(")")
                return Call("random", (x,))
            # element property access
            self.expect(".")
            keyword = self.next()
            if keyword[1] != "property":
                raise ParseError(f"expected 'property', got {keyword[1]!r}", offset=keyword[2])
            self.expect("(")
            skind, stext, soff = self.next()
            if skind != "string":
                raise ParseError("property name must be a quoted string", offset=soff)
            self.expect(")")
            return Prop(text, _unquote(stext))
        raise ParseError(f"unexpected {text or 'end of input'!r}", offset=off)


def _unquote(token: str) -> str:
    body = token[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


def parse_expression(text: str) -> Expr:
    return _Parser(text).parse()


def format_expression(expr: Expr) -> str:
    return _fmt(expr, 0)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt(expr: Expr, parent_prec: int) -> str:
    if isinstance(expr, Lit):
        v = expr.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return repr(v)
    if isinstance(expr, Prop):
        return f'{expr.ident}.property("{expr.attr}")'
    if isinstance(expr, Call):
        return f"{expr.fn}({', '.join(_fmt(a, 0) for a in expr.args)})"
    if isinstance(expr, BinOp):
        prec = _PREC[expr.op]
        left = _fmt(expr.left, prec - 1)
        # parenthesize right operands of equal precedence so the printed
        # form reparses to the identical tree under left associativity
        right = _fmt(expr.right, prec)
        body = f"{left} {expr.op} {right}"
        return f"({body})" if prec <= parent_prec else body
    raise ExpressionError(f"unknown expression node {expr!r}")

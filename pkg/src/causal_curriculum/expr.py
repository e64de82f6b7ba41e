"""Small expression trees for structural functions, plus a text parser.

Operators, tightest first: not, xor, and, or.  `==` compares two operands
and yields 0/1.  Rational literals may be written as integers, decimals
("0.5") or fractions ("1/2"); a literal followed by `*` scales the operand
exactly (Fraction arithmetic).  `if c then a else b` selects on truthiness.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

Value = Union[int, str, Fraction]


class ExpressionError(ValueError):
    pass


def _truth(v) -> bool:
    return bool(v)


def _bit(v) -> int:
    return 1 if v else 0


@dataclass(frozen=True)
class Const:
    value: Value

    def evaluate(self, env):
        return self.value

    def references(self):
        return frozenset()

    def unparse(self, prec=0):
        return _literal(self.value)


@dataclass(frozen=True)
class Ref:
    name: str

    def evaluate(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise ExpressionError(f"unbound variable {self.name!r}") from None

    def references(self):
        return frozenset({self.name})

    def unparse(self, prec=0):
        return self.name


@dataclass(frozen=True)
class Not:
    operand: "Expr"

    def evaluate(self, env):
        return 1 - _bit(self.operand.evaluate(env))

    def references(self):
        return self.operand.references()

    def unparse(self, prec=0):
        return f"not {self.operand.unparse(6)}"


_PREC = {"or": 2, "and": 3, "xor": 4, "==": 5}


@dataclass(frozen=True)
class BinOp:
    op: str  # "xor" | "and" | "or" | "=="
    left: "Expr"
    right: "Expr"

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        if self.op == "xor":
            return _bit(a) ^ _bit(b)
        if self.op == "and":
            return _bit(_truth(a) and _truth(b))
        if self.op == "or":
            return _bit(_truth(a) or _truth(b))
        if self.op == "==":
            return _bit(a == b)
        raise ExpressionError(f"unknown operator {self.op}")

    def references(self):
        return self.left.references() | self.right.references()

    def unparse(self, prec=0):
        p = _PREC[self.op]
        text = f"{self.left.unparse(p)} {self.op} {self.right.unparse(p + 1)}"
        return f"({text})" if p < prec else text


@dataclass(frozen=True)
class IfThenElse:
    condition: "Expr"
    then: "Expr"
    otherwise: "Expr"

    def evaluate(self, env):
        return self.then.evaluate(env) if _truth(self.condition.evaluate(env)) else self.otherwise.evaluate(env)

    def references(self):
        return self.condition.references() | self.then.references() | self.otherwise.references()

    def unparse(self, prec=0):
        text = (
            f"if {self.condition.unparse(1)} then {self.then.unparse(1)} "
            f"else {self.otherwise.unparse(1)}"
        )
        return f"({text})" if prec > 1 else text


@dataclass(frozen=True)
class Scale:
    factor: Fraction
    operand: "Expr"

    def evaluate(self, env):
        v = self.operand.evaluate(env)
        if isinstance(v, str):
            raise ExpressionError(f"cannot scale symbolic value {v!r}")
        return self.factor * Fraction(v)

    def references(self):
        return self.operand.references()

    def unparse(self, prec=0):
        return f"{_literal(self.factor)}*{self.operand.unparse(7)}"


Expr = Union[Const, Ref, Not, BinOp, IfThenElse, Scale]


def _literal(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


# --------------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>-?\d+/\d+|-?\d+\.\d+|-?\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>==|\(|\)|\*))"
)
_KEYWORDS = {"not", "xor", "and", "or", "if", "then", "else"}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ExpressionError(f"cannot tokenize {rest[:20]!r}")
        pos = m.end()
        if m.group("num") is not None:
            tokens.append(("num", m.group("num")))
        elif m.group("name") is not None:
            name = m.group("name")
            tokens.append(("kw", name) if name in _KEYWORDS else ("name", name))
        else:
            tokens.append(("op", m.group("op")))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if kind is not None and tok[0] != kind:
            raise ExpressionError(f"expected {kind}, got {tok}")
        if value is not None and tok[1] != value:
            raise ExpressionError(f"expected {value!r}, got {tok}")
        self.i += 1
        return tok

    def expr(self):
        if self.peek() == ("kw", "if"):
            self.take()
            cond = self.expr()
            self.take("kw", "then")
            then = self.expr()
            self.take("kw", "else")
            other = self.expr()
            return IfThenElse(cond, then, other)
        return self.or_()

    def or_(self):
        node = self.and_()
        while self.peek() == ("kw", "or"):
            self.take()
            node = BinOp("or", node, self.and_())
        return node

    def and_(self):
        node = self.xor_()
        while self.peek() == ("kw", "and"):
            self.take()
            node = BinOp("and", node, self.xor_())
        return node

    def xor_(self):
        node = self.cmp()
        while self.peek() == ("kw", "xor"):
            self.take()
            node = BinOp("xor", node, self.cmp())
        return node

    def cmp(self):
        node = self.scale()
        if self.peek() == ("op", "=="):
            self.take()
            node = BinOp("==", node, self.scale())
        return node

    def scale(self):
        kind, text = self.peek()
        if kind == "num" and self.tokens[self.i + 1 : self.i + 2] == [("op", "*")]:
            self.take()
            self.take("op", "*")
            return Scale(_to_fraction(text), self.scale())
        return self.unary()

    def unary(self):
        if self.peek() == ("kw", "not"):
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self):
        kind, text = self.peek()
        if kind == "num":
            self.take()
            f = _to_fraction(text)
            return Const(int(f) if f.denominator == 1 else f)
        if kind == "name":
            self.take()
            return Ref(text)
        if (kind, text) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ExpressionError(f"unexpected token {self.peek()}")


def _to_fraction(text: str) -> Fraction:
    return Fraction(text)


def parse_expression(text: str) -> Expr:
    """Parse an expression string into a tree; raises ExpressionError."""
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    if parser.peek() != (None, None):
        raise ExpressionError(f"trailing tokens at {parser.peek()}")
    return node

"""Small infix parser shared by scalar and differential-form expressions.

Grammar (``^`` binds tightest, juxtaposition is multiplication)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary | unary)*
    unary  := '-' unary | power
    power  := atom ('^' atom)*
    atom   := INT | NAME | NAME '(' expr ')' | '(' expr ')'

The parser does not know what the values are.  It hands literals, names,
calls and operators to an :class:`Algebra`, which decides what ``^`` means
(integer power for scalars, wedge product for forms).
"""

from __future__ import annotations

import re
from typing import Any

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


class ParseError(ValueError):
    pass


class Algebra:
    """Callbacks that give meaning to parsed syntax."""

    def integer(self, n: int) -> Any:
        raise NotImplementedError

    def name(self, ident: str) -> Any:
        raise NotImplementedError

    def call(self, fn: str, arg: Any) -> Any:
        raise ParseError(f"unknown function {fn!r}")

    def caret(self, left: Any, right: Any, right_literal: int | None) -> Any:
        raise NotImplementedError

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def mul(self, x, y):
        return x * y

    def div(self, x, y):
        return x / y

    def neg(self, x):
        return -x


def tokenize(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        pos = m.end()
        num, ident, op = m.groups()
        if num is not None:
            out.append(("int", num))
        elif ident is not None:
            out.append(("name", ident))
        elif op is not None and not op.isspace():
            if op not in "+-*/^()":
                raise ParseError(f"unexpected character {op!r} in {text!r}")
            out.append(("op", op))
    return out


class _Parser:
    def __init__(self, text: str, algebra: Algebra):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.alg = algebra

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r} in {self.text!r}")

    def starts_atom(self):
        kind, val = self.peek()
        return kind in ("int", "name") or (kind == "op" and val == "(")

    def parse(self):
        if not self.toks:
            raise ParseError("empty expression")
        value = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input in {self.text!r}")
        return value

    def expr(self):
        value = self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                value = self.alg.add(value, rhs) if val == "+" else self.alg.sub(value, rhs)
            else:
                return value

    def term(self):
        value = self.unary()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                value = self.alg.mul(value, rhs) if val == "*" else self.alg.div(value, rhs)
            elif self.starts_atom():
                value = self.alg.mul(value, self.unary())
            else:
                return value

    def unary(self):
        kind, val = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return self.alg.neg(self.unary())
        return self.power()

    def power(self):
        value = self.atom()
        while True:
            kind, val = self.peek()
            if not (kind == "op" and val == "^"):
                return value
            self.take()
            nkind, nval = self.peek()
            literal = int(nval) if nkind == "int" else None
            rhs = self.atom()
            value = self.alg.caret(value, rhs, literal)

    def atom(self):
        kind, val = self.take()
        if kind == "int":
            return self.alg.integer(int(val))
        if kind == "name":
            nkind, nval = self.peek()
            if nkind == "op" and nval == "(":
                self.take()
                arg = self.expr()
                self.expect(")")
                return self.alg.call(val, arg)
            return self.alg.name(val)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")


def parse(text: str, algebra: Algebra):
    return _Parser(text, algebra).parse()

"""Parser for group-algebra expressions typed on the command line.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('+' | '-') factor | power
    power  := atom ('^' '-'? INT)*
    atom   := NUMBER | NUMBER 'i' | 'i' | NAME | '(' expr ')' | 'star' '(' expr ')'

``1`` is the identity, ``i`` the imaginary unit, ``x^-1`` the inverse of a
scalar multiple of a group element and ``star(x)`` the adjoint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .algebra import AlgebraElement
from .coeffs import Gaussian
from .errors import ExpressionSyntaxError, UnknownGenerator
from .wreath_core import Automaton

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d+)?)(?P<imag>i(?![A-Za-z0-9_~']))?
  | (?P<name>[A-Za-z_][A-Za-z0-9_~']*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str  # number, imag, name, op, end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        if m.group("number") is not None:
            kind = "imag" if m.group("imag") else "number"
            toks.append(_Tok(kind, m.group("number"), pos))
        elif m.group("name") is not None:
            toks.append(_Tok("name", m.group("name"), pos))
        elif m.group("op") is not None:
            toks.append(_Tok("op", m.group("op"), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, automaton: Automaton):
        self.text = text
        self.A = automaton
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxError(f"{msg}, found {found}", self.text, tok.pos)

    def expect(self, op: str):
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            self.error(f"expected {op!r}")
        self.take()

    def parse(self) -> AlgebraElement:
        if self.peek().kind == "end":
            self.error("expected an expression")
        x = self.expr()
        if self.peek().kind != "end":
            self.error("unexpected trailing input")
        return x

    def expr(self) -> AlgebraElement:
        x = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            y = self.term()
            x = x + y if op == "+" else x - y
        return x

    def term(self) -> AlgebraElement:
        x = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take()
            at = self.peek()
            y = self.factor()
            if op.text == "*":
                x = x * y
            else:
                mono = y.monomial()
                if mono is None or mono[0] != ():
                    self.error("division only by a nonzero scalar", at)
                x = x / mono[1]
        return x

    def factor(self) -> AlgebraElement:
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.take()
            x = self.factor()
            return -x if tok.text == "-" else x
        return self.power()

    def power(self) -> AlgebraElement:
        x = self.atom()
        while self.peek().kind == "op" and self.peek().text == "^":
            caret = self.take()
            neg = False
            if self.peek().kind == "op" and self.peek().text == "-":
                self.take()
                neg = True
            tok = self.peek()
            if tok.kind != "number" or not tok.text.isdigit():
                self.error("expected an integer exponent")
            self.take()
            k = int(tok.text) * (-1 if neg else 1)
            try:
                x = x ** k
            except ValueError as exc:
                raise ExpressionSyntaxError(str(exc), self.text, caret.pos) from None
        return x

    def atom(self) -> AlgebraElement:
        tok = self.peek()
        A = self.A
        if tok.kind == "number":
            self.take()
            return AlgebraElement.scalar(A, Gaussian(Fraction(tok.text)))
        if tok.kind == "imag":
            self.take()
            return AlgebraElement.scalar(A, Gaussian(0, Fraction(tok.text)))
        if tok.kind == "name":
            self.take()
            if tok.text == "star":
                self.expect("(")
                x = self.expr()
                self.expect(")")
                return x.star()
            if tok.text == "i":
                return AlgebraElement.scalar(A, Gaussian(0, 1))
            if tok.text not in A.states:
                raise UnknownGenerator(f"unknown generator {tok.text!r} at position {tok.pos}")
            return AlgebraElement.from_word(A, ((tok.text, 1),))
        if tok.kind == "op" and tok.text == "(":
            self.take()
            x = self.expr()
            self.expect(")")
            return x
        self.error("expected a number, generator or '('")


def parse_expression(text: str, automaton: Automaton) -> AlgebraElement:
    """Parse ``text`` into a canonicalized :class:`AlgebraElement`."""
    return _Parser(text, automaton).parse()

"""Recursive-descent parser for the canonical expression grammar.

The accepted grammar (full details in ``docs/grammar.md``)::

    expr    := ncterm (("+" | "-") ncterm)*
    ncterm  := term ("@" term)*
    term    := factor (("*" | "/") factor)*
    factor  := "-" factor | pow
    pow     := primary ("**" factor)?
    primary := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")" | "?"

``@`` is the non-commutative product and binds between ``+`` and ``*``.
``a - b`` is sugar for ``a + (-1)*b`` and ``a / b`` for ``a * b**(-1)``,
except that a numeric literal divided by a numeric literal folds into an
exact rational leaf, so ``1/2`` round-trips as a rational.  Numbers are
non-negative integer literals; there are no floats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .expr import (
    Expression,
    add,
    func,
    integer,
    mul,
    ncmul,
    negate,
    power,
    rational,
    sym,
    PLACEHOLDER,
)


class ParseError(ValueError):
    """Syntax error with a 1-based character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "name" | "op"
    text: str
    pos: int  # 1-based character offset


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+)
  | (?P<name>[^\W\d][\w†]*)
  | (?P<op>\*\*|[+\-*/@(),?])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i + 1)
        if m.lastgroup == "number":
            tokens.append(_Token("number", m.group(), i + 1))
        elif m.lastgroup == "name":
            tokens.append(_Token("name", m.group(), i + 1))
        elif m.lastgroup == "op":
            tokens.append(_Token("op", m.group(), i + 1))
        i = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next_pos(self) -> int:
        tok = self.peek()
        return tok.pos if tok is not None else len(self.text) + 1

    def take(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.next_pos())
        self.i += 1
        return tok

    def accept_op(self, *ops: str) -> _Token | None:
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text in ops:
            self.i += 1
            return tok
        return None

    def parse(self) -> Expression:
        if not self.tokens:
            raise ParseError("empty expression", 1)
        e = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok.text!r}", tok.pos)
        return e

    def expr(self) -> Expression:
        terms = [self.ncterm()]
        while True:
            if self.accept_op("+"):
                terms.append(self.ncterm())
            elif self.accept_op("-"):
                terms.append(negate(self.ncterm()))
            else:
                break
        return add(*terms) if len(terms) > 1 else terms[0]

    def ncterm(self) -> Expression:
        factors = [self.term()]
        while self.accept_op("@"):
            factors.append(self.term())
        return ncmul(*factors) if len(factors) > 1 else factors[0]

    def term(self) -> Expression:
        factors = [self.factor()]
        while True:
            if self.accept_op("*"):
                factors.append(self.factor())
            elif self.accept_op("/"):
                nxt = self.factor()
                prev = factors[-1]
                if prev.is_numeric() and nxt.is_numeric():
                    # Literal over literal folds to an exact rational so that
                    # rational leaves round-trip through the text form.
                    pf, nf = prev.as_fraction(), nxt.as_fraction()
                    if nf == 0:
                        raise ParseError("division by literal zero", self.next_pos())
                    factors[-1] = rational(
                        pf.numerator * nf.denominator, pf.denominator * nf.numerator
                    )
                else:
                    factors.append(power(nxt, integer(-1)))
            else:
                break
        return mul(*factors) if len(factors) > 1 else factors[0]

    def factor(self) -> Expression:
        if self.accept_op("-"):
            return negate(self.factor())
        return self.pow()

    def pow(self) -> Expression:
        base = self.primary()
        if self.accept_op("**"):
            return power(base, self.factor())
        return base

    def primary(self) -> Expression:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected expression", self.next_pos())
        if tok.kind == "number":
            self.i += 1
            return integer(int(tok.text))
        if tok.kind == "name":
            self.i += 1
            if self.accept_op("("):
                open_pos = tok.pos
                args = [self.group_expr(open_pos)]
                while self.accept_op(","):
                    args.append(self.group_expr(open_pos))
                if not self.accept_op(")"):
                    raise ParseError("unclosed function call", open_pos)
                return func(tok.text, *args)
            return sym(tok.text)
        if tok.kind == "op" and tok.text == "?":
            self.i += 1
            return PLACEHOLDER
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            inner = self.group_expr(tok.pos)
            if not self.accept_op(")"):
                raise ParseError("unclosed parenthesis", tok.pos)
            return inner
        raise ParseError(f"unexpected {tok.text!r}", tok.pos)

    def group_expr(self, open_pos: int) -> Expression:
        # Inside a delimited group, a premature end of input is reported at
        # the opening delimiter, which is where the mistake is.
        try:
            return self.expr()
        except ParseError as err:
            if self.peek() is None:
                raise ParseError("unclosed parenthesis", open_pos) from None
            raise err


def parse(text: str) -> Expression:
    """Parse ``text`` into a canonical :class:`Expression`.

    Raises :class:`ParseError` with a 1-based position on malformed input.
    """
    return _Parser(text).parse()

"""Tokenizer and recursive-descent parser for arithmetic expressions.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" factor)?
    atom   := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, List

from ..errors import DepthExceeded, ExprSyntaxError, UnknownIdentifier
from .ast import CONSTANTS, FUNCTIONS, BinOp, Call, Const, Neg, Num, Var, depth

MAX_DEPTH = 64

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
)

_END = "end of input"


@dataclass(frozen=True)
class Token:
    kind: str  # "number", "ident", an operator character, or "end"
    text: str
    offset: int  # byte offset


def tokenize(source: str) -> List[Token]:
    tokens = []
    i = 0
    byte = 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[i]!r}", byte)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            tokens.append(Token(text if kind == "op" else kind, text, byte))
        byte += len(text.encode("utf-8"))
        i = m.end()
    tokens.append(Token("end", "", byte))
    return tokens


def _describe(kind: str) -> str:
    return {"end": _END, "number": "number", "ident": "identifier"}.get(kind, kind)


class _Parser:
    def __init__(self, source: str, allowed_vars: Iterable[str]):
        self.tokens = tokenize(source)
        self.i = 0
        self.allowed = frozenset(allowed_vars)
        self.expected = set()
        self.depth = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        self.expected = set()
        return tok

    def accept(self, *kinds):
        if self.tok.kind in kinds:
            return self.advance()
        self.expected.update(_describe(k) for k in kinds)
        return None

    def expect(self, kind):
        tok = self.accept(kind)
        if tok is None:
            self.fail()
        return tok

    def fail(self, message=None):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(message or f"unexpected {found}", tok.offset, self.expected)

    def enter(self, offset):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise DepthExceeded(f"expression nested deeper than {MAX_DEPTH}", offset)

    def leave(self):
        self.depth -= 1

    # grammar -----------------------------------------------------------------

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.expected.add(_END)
            self.fail()
        return node

    def expr(self):
        node = self.term()
        while (tok := self.accept("+", "-")) is not None:
            node = BinOp(tok.kind, node, self.term(), tok.offset)
        return node

    def term(self):
        node = self.factor()
        while (tok := self.accept("*", "/")) is not None:
            node = BinOp(tok.kind, node, self.factor(), tok.offset)
        return node

    def factor(self):
        tok = self.accept("-")
        if tok is not None:
            self.enter(tok.offset)
            node = Neg(self.factor(), tok.offset)
            self.leave()
            return node
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.accept("^")
        if tok is None:
            return base
        self.enter(tok.offset)
        node = BinOp("^", base, self.factor(), tok.offset)
        self.leave()
        return node

    def atom(self):
        tok = self.tok
        if self.accept("number"):
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number {tok.text} out of range", tok.offset)
            return Num(value, tok.offset)
        if self.accept("ident"):
            if self.accept("("):
                return self.call(tok)
            if tok.text in self.allowed:
                return Var(tok.text, tok.offset)
            if tok.text in CONSTANTS:
                return Const(tok.text, tok.offset)
            allowed = ", ".join(sorted(self.allowed)) or "none"
            raise UnknownIdentifier(
                f"unknown identifier {tok.text!r} (variables: {allowed})", tok.offset)
        if self.accept("("):
            self.enter(tok.offset)
            node = self.expr()
            self.expect(")")
            self.leave()
            return node
        self.expected.add("-")
        self.fail()

    def call(self, name: Token):
        if name.text not in FUNCTIONS:
            raise UnknownIdentifier(f"unknown function {name.text!r}", name.offset)
        self.enter(name.offset)
        args = [self.expr()]
        while self.accept(","):
            args.append(self.expr())
        self.expect(")")
        self.leave()
        arity = FUNCTIONS[name.text]
        if len(args) != arity:
            raise ExprSyntaxError(
                f"{name.text} takes {arity} argument(s), got {len(args)}", name.offset)
        return Call(name.text, tuple(args), name.offset)


def parse_expr(source: str, allowed_vars=("u", "v")):
    """Parse ``source`` into an expression tree.

    Raises
    ------
    ExprSyntaxError
        Malformed input; carries the byte offset and the expected tokens.
    UnknownIdentifier
        A name that is neither a declared variable, a constant nor a function.
    DepthExceeded
        The tree would be deeper than 64 levels.
    """
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", 0, ["number", "identifier", "(", "-"])
    tree = _Parser(source, allowed_vars).parse()
    if depth(tree) > MAX_DEPTH:
        raise DepthExceeded(f"expression tree deeper than {MAX_DEPTH}", 0)
    return tree

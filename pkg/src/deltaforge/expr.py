"""Recursive-descent parser and evaluator for coordinate expressions.

Grammar (``^`` is right-associative and binds looser than unary minus)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?
    unary  := '-' unary | atom
    atom   := number | 'pi' | ident | func '(' expr ')' | '(' expr ')'

Evaluation is generic over floats and ``HyperDual`` values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from . import hyperdual as hd
from .errors import ArityError, EvalError, ParseError, UnboundIdentifier

FUNCTION_NAMES = frozenset(hd.FUNCTIONS)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    ident: str
    line: int = 1
    column: int = 1


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


Node = Union[Num, Name, Neg, BinOp, Call]


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'op', 'end'
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
)


def tokenize(text: str, line: int = 1, column: int = 1) -> list[Token]:
    """Split ``text`` into tokens; ``line``/``column`` locate its first character."""
    tokens = []
    pos = 0
    ln, col = line, column
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", ln, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, ln, col))
        newlines = chunk.count("\n")
        if newlines:
            ln += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("end", "", ln, col))
    return tokens


class _Parser:
    def __init__(self, tokens, names):
        self.tokens = tokens
        self.i = 0
        self.names = names

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.text != text:
            found = "end of input" if t.kind == "end" else repr(t.text)
            raise ParseError(f"expected {text!r}, found {found}", t.line, t.column)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            t = self.tok
            raise ParseError(f"unexpected token {t.text!r}", t.line, t.column)
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        base = self.unary()
        if self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.factor())
        return base

    def unary(self):
        if self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "ident":
            self.advance()
            if t.text in FUNCTION_NAMES:
                return self.call(t)
            if self.tok.text == "(":
                raise UnboundIdentifier(f"unknown function {t.text!r}", t.line, t.column)
            if t.text == "pi":
                return Num(math.pi)
            if self.names is not None and t.text not in self.names:
                raise UnboundIdentifier(f"unbound identifier {t.text!r}", t.line, t.column)
            return Name(t.text, t.line, t.column)
        if t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"unexpected {found}", t.line, t.column)

    def call(self, name_tok):
        if self.tok.text != "(":
            raise ParseError(f"function {name_tok.text!r} must be called with parentheses",
                             name_tok.line, name_tok.column)
        open_tok = self.advance()
        if self.tok.text == ")":
            raise ArityError(f"{name_tok.text} takes exactly 1 argument (0 given)",
                             name_tok.line, name_tok.column)
        arg = self.expr()
        if self.tok.text == ",":
            raise ArityError(f"{name_tok.text} takes exactly 1 argument",
                             name_tok.line, name_tok.column)
        if self.tok.text != ")":
            # report the unclosed parenthesis, not the place we ran out
            raise ParseError("unclosed parenthesis", open_tok.line, open_tok.column)
        self.advance()
        return Call(name_tok.text, arg)


def parse_expression(text: str, names=None, line: int = 1, column: int = 1) -> Node:
    """Parse ``text``; if ``names`` is given, every identifier must belong to it."""
    return _Parser(tokenize(text, line, column), names).parse()


def free_names(node: Node) -> set[str]:
    if isinstance(node, Name):
        return {node.ident}
    if isinstance(node, Neg):
        return free_names(node.operand)
    if isinstance(node, BinOp):
        return free_names(node.left) | free_names(node.right)
    if isinstance(node, Call):
        return free_names(node.arg)
    return set()


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        return env[node.ident]
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return a / b
        if isinstance(a, hd.HyperDual) or isinstance(b, hd.HyperDual):
            return a ** b
        return _real_pow(a, b)
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    return hd.FUNCTIONS[node.func](_eval(node.arg, env))


def _real_pow(a, b):
    if a < 0.0 and not float(b).is_integer():
        raise ValueError("non-integer power of a negative value")
    return math.pow(a, b)


def evaluate(node: Node, env: dict):
    """Evaluate ``node`` with identifiers bound by ``env`` (floats or HyperDual)."""
    try:
        out = _eval(node, env)
    except KeyError as exc:
        raise EvalError(f"unbound identifier {exc.args[0]!r} at evaluation") from None
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvalError(f"expression evaluation failed: {exc}") from None
    finite = out.is_finite() if isinstance(out, hd.HyperDual) else math.isfinite(out)
    if not finite:
        raise EvalError("expression produced a non-finite value")
    return out

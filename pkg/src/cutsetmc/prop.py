"""Propositional expressions over typed state variables.

Shared between the model language (guards) and the temporal logic layer,
which reuses these nodes for its propositional skeleton. Atoms test a
variable against one of its domain values; Boolean-domain variables may be
written bare as shorthand for `name = true`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class TrueExpr(Expr):
    pass


@dataclass(frozen=True)
class FalseExpr(Expr):
    pass


@dataclass(frozen=True)
class Atom(Expr):
    var: str
    value: str


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr


TRUE = TrueExpr()
FALSE = FalseExpr()


def conj(parts):
    parts = list(parts)
    if not parts:
        return TRUE
    result = parts[0]
    for p in parts[1:]:
        result = And(result, p)
    return result


def disj(parts):
    parts = list(parts)
    if not parts:
        return FALSE
    result = parts[0]
    for p in parts[1:]:
        result = Or(result, p)
    return result


def evaluate(expr: Expr, state: dict) -> bool:
    """Evaluate under a state mapping variable name -> value name."""
    if isinstance(expr, TrueExpr):
        return True
    if isinstance(expr, FalseExpr):
        return False
    if isinstance(expr, Atom):
        return state[expr.var] == expr.value
    if isinstance(expr, Not):
        return not evaluate(expr.operand, state)
    if isinstance(expr, And):
        return evaluate(expr.left, state) and evaluate(expr.right, state)
    if isinstance(expr, Or):
        return evaluate(expr.left, state) or evaluate(expr.right, state)
    raise TypeError(f"not a propositional expression: {expr!r}")


def atoms(expr: Expr):
    if isinstance(expr, Atom):
        yield expr
    elif isinstance(expr, Not):
        yield from atoms(expr.operand)
    elif isinstance(expr, (And, Or)):
        yield from atoms(expr.left)
        yield from atoms(expr.right)


def to_text(expr: Expr) -> str:
    """Render with minimal parentheses (| lowest, then &, then !)."""
    return _render(expr, 0)


def _render(expr, parent_prec):
    if isinstance(expr, TrueExpr):
        return "true"
    if isinstance(expr, FalseExpr):
        return "false"
    if isinstance(expr, Atom):
        return f"{expr.var} = {expr.value}"
    if isinstance(expr, Not):
        return "!" + _wrap(expr.operand, 3)
    if isinstance(expr, And):
        text = f"{_render(expr.left, 2)} & {_render(expr.right, 2)}"
        return f"({text})" if parent_prec > 2 else text
    if isinstance(expr, Or):
        text = f"{_render(expr.left, 1)} | {_render(expr.right, 1)}"
        return f"({text})" if parent_prec > 1 else text
    raise TypeError(f"not a propositional expression: {expr!r}")


def _wrap(expr, prec):
    if isinstance(expr, (Atom, TrueExpr, FalseExpr, Not)):
        return _render(expr, prec)
    return "(" + _render(expr, 0) + ")"


# ---------------------------------------------------------------------------
# Tokenizer shared by the model and property parsers.

class ParseError(Exception):
    def __init__(self, message, line, column):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|!=|->|[{}();:,=!&|])
""", re.VERBOSE)


def tokenize(text: str) -> list:
    tokens = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def accept(self, text) -> bool:
        if self.peek().text == text and self.peek().kind != "eof":
            self.next()
            return True
        return False

    def expect(self, text) -> Token:
        tok = self.peek()
        if tok.kind == "eof" or tok.text != text:
            shown = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected {text!r}, found {shown}", tok.line, tok.column)
        return self.next()

    def expect_name(self, what="identifier") -> Token:
        tok = self.peek()
        if tok.kind != "name":
            shown = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected {what}, found {shown}", tok.line, tok.column)
        return self.next()

    def error(self, message):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.column)

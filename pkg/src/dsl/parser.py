"""
Recursive-descent parser for the germ DSL.

Grammar (precedence ^ > unary minus > * / > + -, `^` right associative):

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?
    atom    := NUMBER | FLOAT | NAME | NAME "(" args ")" | "(" expr ")"
             | "[" args "]" | "field" "[" args "]" | "logform" "{" expr "}"
"""

from __future__ import annotations

import re
from typing import List, Optional, Tuple

from src.dsl.lexer import Token, tokenize
from src.dsl.nodes import (
    FUNCTIONS,
    BinOp,
    Call,
    Context,
    Expr,
    FieldLit,
    Float,
    LogFormLit,
    MapLit,
    Name,
    Neg,
    Number,
    Span,
)
from src.errors import DSLParseError

_ALIASES = {"x": 0, "y": 1, "z": 2}
_INDEXED = re.compile(r"z([1-9]\d*)")
_ZETA = re.compile(r"zeta([1-9]\d*)")


def classify_name(name: str, n_vars: int) -> Optional[Tuple[str, int]]:
    """("var", index), ("diff", index), ("i", 0) or ("zeta", m); None for unknown names."""
    if name == "i":
        return ("i", 0)
    zeta = _ZETA.fullmatch(name)
    if zeta:
        return ("zeta", int(zeta.group(1)))
    kind, base = ("diff", name[1:]) if name.startswith("d") and len(name) > 1 else ("var", name)
    if base in _ALIASES and n_vars <= 3:
        return (kind, _ALIASES[base])
    indexed = _INDEXED.fullmatch(base)
    if indexed:
        return (kind, int(indexed.group(1)) - 1)
    return None


class Parser:
    def __init__(self, source: str, context: Context):
        self.tokens = tokenize(source)
        self.pos = 0
        self.context = context

    # ------------------------------------------------------------------ helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "EOF":
            self.pos += 1
        return token

    def _error(self, message: str, token: Optional[Token] = None) -> DSLParseError:
        token = token or self.current
        found = "end of input" if token.kind == "EOF" else repr(token.text)
        return DSLParseError(f"{message}, found {found}", token.span.line, token.span.col)

    def _is_op(self, text: str) -> bool:
        return self.current.kind == "OP" and self.current.text == text

    def _expect(self, text: str) -> Token:
        if not self._is_op(text):
            raise self._error(f"expected '{text}'")
        return self._advance()

    # ------------------------------------------------------------------ grammar

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != "EOF":
            raise self._error("unexpected trailing input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self._is_op("+") or self._is_op("-"):
            op = self._advance().text
            node = BinOp(op, node, self.term(), node.span)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self._is_op("*") or self._is_op("/"):
            op = self._advance().text
            node = BinOp(op, node, self.unary(), node.span)
        return node

    def unary(self) -> Expr:
        if self._is_op("-"):
            span = self._advance().span
            return Neg(self.unary(), span)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self._is_op("^"):
            self._advance()
            return BinOp("^", base, self.unary(), base.span)
        return base

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "NUMBER":
            self._advance()
            return Number(int(token.text), token.span)
        if token.kind == "FLOAT":
            if self.context.field.is_exact:
                raise DSLParseError(
                    f"float literal '{token.text}' needs --field f64", token.span.line, token.span.col
                )
            self._advance()
            return Float(token.text, token.span)
        if token.kind == "IDENT":
            return self._identifier()
        if self._is_op("("):
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        if self._is_op("["):
            self._advance()
            return MapLit(tuple(self._items("]")), token.span)
        raise self._error("expected an expression")

    def _identifier(self) -> Expr:
        token = self._advance()
        name = token.text
        if name == "field" and self._is_op("["):
            self._advance()
            return FieldLit(tuple(self._items("]")), token.span)
        if name == "logform" and self._is_op("{"):
            self._advance()
            body = self.expr()
            self._expect("}")
            return LogFormLit(body, token.span)
        if name in FUNCTIONS and self._is_op("("):
            self._advance()
            args = self._items(")")
            arity = FUNCTIONS[name]
            if arity is None and len(args) < 2:
                raise DSLParseError(f"{name}() takes at least 2 arguments", token.span.line, token.span.col)
            if arity is not None and len(args) != arity:
                raise DSLParseError(
                    f"{name}() takes {arity} argument{'s' if arity > 1 else ''}, got {len(args)}",
                    token.span.line,
                    token.span.col,
                )
            return Call(name, tuple(args), token.span)
        kind = classify_name(name, self.context.n_vars)
        if kind is None:
            raise DSLParseError(f"unknown name '{name}'", token.span.line, token.span.col)
        if kind[0] in ("var", "diff") and not 0 <= kind[1] < self.context.n_vars:
            raise DSLParseError(
                f"'{name}' is out of range for {self.context.n_vars} variables", token.span.line, token.span.col
            )
        return Name(name, token.span)

    def _items(self, closing: str) -> List[Expr]:
        items: List[Expr] = []
        if self._is_op(closing):
            self._advance()
            return items
        while True:
            items.append(self.expr())
            if self._is_op(","):
                self._advance()
                continue
            self._expect(closing)
            return items


def parse(source: str, context: Context) -> Expr:
    """Parse DSL source into an AST; raises DSLParseError positioned at line:col."""
    return Parser(source, context).parse()

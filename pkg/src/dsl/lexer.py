"""
Tokenizer for the germ DSL.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List

from src.dsl.nodes import Span
from src.errors import DSLParseError

PUNCTUATION = "+-*/^()[]{},"

_NUMBER = re.compile(r"\d+(\.\d*)?([eE][+-]?\d+)?j?|\.\d+([eE][+-]?\d+)?j?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, FLOAT, IDENT, OP, EOF
    text: str
    span: Span


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        ch = source[pos]
        col = pos - line_start + 1
        if ch == "\n":
            line, line_start = line + 1, pos + 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        if ch in PUNCTUATION:
            tokens.append(Token("OP", ch, Span(line, col)))
            pos += 1
            continue
        number = _NUMBER.match(source, pos)
        if number:
            text = number.group(0)
            is_float = any(c in text for c in ".eEj")
            tokens.append(Token("FLOAT" if is_float else "NUMBER", text, Span(line, col)))
            pos = number.end()
            continue
        ident = _IDENT.match(source, pos)
        if ident:
            tokens.append(Token("IDENT", ident.group(0), Span(line, col)))
            pos = ident.end()
            continue
        raise DSLParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", Span(line, len(source) - line_start + 1)))
    return tokens

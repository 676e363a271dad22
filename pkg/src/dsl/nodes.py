"""
Expression AST for the germ DSL.

Every node carries the source position of its first token. Positions do not
take part in equality, so a parsed tree compares equal to the tree obtained by
parsing its printed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple, Union

from src.coeff import Field


@dataclass(frozen=True)
class Span:
    line: int = 1
    col: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOWHERE = Span(0, 0)


@dataclass(frozen=True)
class Context:
    """Ambient in which DSL source is parsed and evaluated."""

    n_vars: int
    order: int
    field: Field


@dataclass(frozen=True)
class Number:
    value: int
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class Float:
    """A float literal (f64 only); text keeps the source spelling, e.g. `2.5` or `1e-3j`."""

    text: str
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class Name:
    """Variables, differentials, `i` and `zetaM`."""

    name: str
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class MapLit:
    items: Tuple["Expr", ...]
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class FieldLit:
    items: Tuple["Expr", ...]
    span: Span = field(default=NOWHERE, compare=False)


@dataclass(frozen=True)
class LogFormLit:
    body: "Expr"
    span: Span = field(default=NOWHERE, compare=False)


Expr = Union[Number, Float, Name, Neg, BinOp, Call, MapLit, FieldLit, LogFormLit]

# name -> number of arguments (None: variadic, at least two)
FUNCTIONS = {
    "d": 1,
    "wedge": None,
    "iv": 2,
    "lie": 2,
    "pullback": 2,
    "dlog": 1,
    "exp": 1,
    "log": 1,
}

"""
Canonical printing of DSL ASTs with minimal parentheses.
"""

from __future__ import annotations

from src.dsl.nodes import BinOp, Call, Expr, FieldLit, Float, LogFormLit, MapLit, Name, Neg, Number

_ATOM = 5
_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _precedence(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PRECEDENCE[node.op]
    if isinstance(node, Neg):
        return 3
    return _ATOM


def _wrapped(node: Expr, minimum: int) -> str:
    text = print_expr(node)
    return text if _precedence(node) >= minimum else f"({text})"


def _joined(items) -> str:
    return ", ".join(print_expr(item) for item in items)


def print_expr(node: Expr) -> str:
    if isinstance(node, Number):
        return str(node.value)
    if isinstance(node, Float):
        return node.text
    if isinstance(node, Name):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrapped(node.operand, 3)
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        if node.op == "^":
            return f"{_wrapped(node.left, _ATOM)}^{_wrapped(node.right, 3)}"
        sep = f" {node.op} " if prec == 1 else node.op
        return _wrapped(node.left, prec) + sep + _wrapped(node.right, prec + 1)
    if isinstance(node, Call):
        return f"{node.func}({_joined(node.args)})"
    if isinstance(node, MapLit):
        return f"[{_joined(node.items)}]"
    if isinstance(node, FieldLit):
        return f"field[{_joined(node.items)}]"
    if isinstance(node, LogFormLit):
        return "logform{ " + print_expr(node.body) + " }"
    raise TypeError(f"not a DSL node: {node!r}")

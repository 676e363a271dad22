"""
Expression language for germs: functions, forms, vector fields, maps and
logarithmic forms. Shared by the command line and the HTTP surface.
"""

from src.dsl.evaluator import Value, evaluate, evaluate_source, expect
from src.dsl.lexer import Token, tokenize
from src.dsl.nodes import Context, Expr, Span
from src.dsl.parser import parse
from src.dsl.printer import print_expr

__all__ = [
    "Context",
    "Expr",
    "Span",
    "Token",
    "Value",
    "evaluate",
    "evaluate_source",
    "expect",
    "parse",
    "print_expr",
    "tokenize",
]

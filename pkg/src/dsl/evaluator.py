"""
Evaluation of DSL ASTs into engine values.

Values are Scalar, Jet, PForm (degree >= 1; 0-forms collapse to jets),
VectorField, DiffeoJet and LogForm. Engine errors raised while evaluating a
node are re-raised as DSLEvalError positioned at that node.
"""

from __future__ import annotations

import cmath
from typing import List, Optional, Tuple, Union

from src.calculus import (
    DiffeoJet,
    PForm,
    VectorField,
    exterior_d,
    interior_product,
    lie_derivative,
    pullback,
    wedge,
)
from src.coeff import CyclotomicField, GaussianField, Scalar
from src.dsl.nodes import (
    NOWHERE,
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
from src.dsl.parser import classify_name, parse
from src.errors import DSLEvalError, GermCalcError
from src.jets import Ambient, Jet, jet_exp, jet_log, jet_unit_inverse
from src.logforms import Branch, LogForm

Value = Union[Scalar, Jet, PForm, VectorField, DiffeoJet, LogForm]

KIND_NAMES = {
    "scalar": "a scalar",
    "jet": "a function",
    "form": "a differential form",
    "field": "a vector field",
    "map": "a map [f1, ..., fn]",
    "logform": "a logform{...} block",
}


def describe(value: Value) -> str:
    if isinstance(value, Scalar):
        return "a scalar"
    if isinstance(value, Jet):
        return "a function"
    if isinstance(value, PForm):
        return f"a {value.degree}-form"
    if isinstance(value, VectorField):
        return "a vector field"
    if isinstance(value, DiffeoJet):
        return "a map"
    return "a logarithmic form"


class Evaluator:
    def __init__(self, context: Context):
        self.context = context
        self.ambient = Ambient(context.field, context.n_vars, context.order)

    # ------------------------------------------------------------------ entry

    def evaluate(self, node: Expr) -> Value:
        try:
            return self._normalize(self._eval(node))
        except DSLEvalError:
            raise
        except GermCalcError as exc:
            raise DSLEvalError(str(exc), node.span.line, node.span.col) from exc
        except ZeroDivisionError as exc:
            raise DSLEvalError(f"division by zero: {exc}", node.span.line, node.span.col) from exc

    @staticmethod
    def _normalize(value: Value) -> Value:
        if isinstance(value, PForm) and value.degree == 0:
            return value.as_function()
        return value

    def _fail(self, message: str, span: Span) -> DSLEvalError:
        return DSLEvalError(message, span.line, span.col)

    def _eval(self, node: Expr) -> Value:
        if isinstance(node, Number):
            return self.context.field.from_rational(node.value)
        if isinstance(node, Float):
            return self.context.field.parse(node.text)
        if isinstance(node, Name):
            return self._name(node)
        if isinstance(node, Neg):
            return self._negate(self.evaluate(node.operand), node.span)
        if isinstance(node, BinOp):
            return self._binop(node)
        if isinstance(node, Call):
            return self._call(node)
        if isinstance(node, MapLit):
            return DiffeoJet([self._jet(item) for item in node.items])
        if isinstance(node, FieldLit):
            return VectorField([self._jet(item) for item in node.items])
        if isinstance(node, LogFormLit):
            return self._log_form(node)
        raise self._fail(f"not a DSL node: {node!r}", NOWHERE)

    # ------------------------------------------------------------------ names

    def _name(self, node: Name) -> Value:
        kind = classify_name(node.name, self.context.n_vars)
        if kind is None:
            raise self._fail(f"unknown name '{node.name}'", node.span)
        tag, value = kind
        if tag == "var":
            return self.ambient.var(value)
        if tag == "diff":
            return PForm.differential(self.ambient, value)
        if tag == "i":
            return self._root_of_unity(4, node)
        return self._root_of_unity(value, node)

    def _root_of_unity(self, m: int, node: Name) -> Scalar:
        field = self.context.field
        if not field.is_exact:
            return field.coerce(cmath.exp(2j * cmath.pi / m))
        if isinstance(field, GaussianField):
            table = {1: field.one(), 2: field.from_rational(-1), 4: field.i()}
            if m in table:
                return table[m]
        if isinstance(field, CyclotomicField):
            if field.m % m == 0:
                return field.zeta(field.m // m)
            if field.m % 2 and (2 * field.m) % m == 0:
                # zeta_2m = -zeta_m^((m+1)/2) for odd m
                root = -field.zeta((field.m + 1) // 2)
                return root ** ((2 * field.m) // m)
        raise self._fail(f"'{node.name}' does not lie in {field.spec()}", node.span)

    # ------------------------------------------------------------------ coercions

    def _as_jet(self, value: Value, span: Span) -> Jet:
        if isinstance(value, Jet):
            return value
        if isinstance(value, Scalar):
            return self.ambient.const(value)
        if isinstance(value, PForm) and value.degree == 0:
            return value.as_function()
        raise self._fail(f"expected a function, got {describe(value)}", span)

    def _as_form(self, value: Value, span: Span) -> PForm:
        if isinstance(value, PForm):
            return value
        if isinstance(value, (Jet, Scalar)):
            return PForm.function(self._as_jet(value, span))
        raise self._fail(f"expected a differential form, got {describe(value)}", span)

    def _jet(self, node: Expr) -> Jet:
        return self._as_jet(self.evaluate(node), node.span)

    def _integer(self, node: Expr) -> int:
        value = self.evaluate(node)
        q = value.rational_value() if isinstance(value, Scalar) else None
        if q is None or q.denominator != 1:
            raise self._fail("exponents must be integers", node.span)
        return int(q)

    # ------------------------------------------------------------------ arithmetic

    def _negate(self, value: Value, span: Span) -> Value:
        if isinstance(value, (Scalar, Jet, PForm, VectorField)):
            return -value
        raise self._fail(f"cannot negate {describe(value)}", span)

    def _binop(self, node: BinOp) -> Value:
        if node.op == "^":
            return self._power(node)
        left, right = self.evaluate(node.left), self.evaluate(node.right)
        if node.op in "+-":
            if node.op == "-":
                right = self._negate(right, node.right.span)
            return self._add(left, right, node.span)
        if node.op == "*":
            return self._multiply(left, right, node.span)
        return self._divide(left, right, node)

    def _add(self, a: Value, b: Value, span: Span) -> Value:
        if isinstance(a, Scalar) and isinstance(b, Scalar):
            return a + b
        if isinstance(a, (Scalar, Jet)) and isinstance(b, (Scalar, Jet)):
            return self._as_jet(a, span) + self._as_jet(b, span)
        if isinstance(a, PForm) and isinstance(b, PForm):
            return a + b
        if isinstance(a, VectorField) and isinstance(b, VectorField):
            return a + b
        raise self._fail(f"cannot add {describe(a)} and {describe(b)}", span)

    def _multiply(self, a: Value, b: Value, span: Span) -> Value:
        if isinstance(a, Scalar) and isinstance(b, Scalar):
            return a * b
        if isinstance(a, (Scalar, Jet)) and isinstance(b, (Scalar, Jet)):
            return self._as_jet(a, span) * self._as_jet(b, span)
        if isinstance(b, (PForm, VectorField)) and isinstance(a, (Scalar, Jet)):
            a, b = b, a
        if isinstance(a, PForm) and isinstance(b, (Scalar, Jet)):
            return a.multiply(self._as_jet(b, span) if isinstance(b, Jet) else b)
        if isinstance(a, VectorField) and isinstance(b, (Scalar, Jet)):
            return a.scale(b)
        if isinstance(a, PForm) and isinstance(b, PForm):
            raise self._fail("use wedge(a, b) to multiply forms", span)
        raise self._fail(f"cannot multiply {describe(a)} by {describe(b)}", span)

    def _divide(self, a: Value, b: Value, node: BinOp) -> Value:
        if isinstance(b, Scalar):
            inverse: Union[Scalar, Jet] = b.inverse()
        elif isinstance(b, Jet):
            inverse = jet_unit_inverse(b)
        else:
            raise self._fail(f"cannot divide by {describe(b)}", node.right.span)
        if isinstance(a, Scalar) and isinstance(inverse, Scalar):
            return a * inverse
        return self._multiply(a, inverse, node.span)

    def _power(self, node: BinOp) -> Value:
        base = self.evaluate(node.left)
        k = self._integer(node.right)
        if isinstance(base, (Scalar, Jet)):
            return base**k
        if isinstance(base, DiffeoJet):
            return base.power(k)
        raise self._fail(f"cannot raise {describe(base)} to a power", node.span)

    # ------------------------------------------------------------------ functions

    def _call(self, node: Call) -> Value:
        args = node.args
        if node.func == "dlog":
            raise self._fail("dlog() is only meaningful inside logform{...}", node.span)
        if node.func == "d":
            return exterior_d(self._as_form(self.evaluate(args[0]), args[0].span))
        if node.func == "wedge":
            forms = [self._as_form(self.evaluate(a), a.span) for a in args]
            result = forms[0]
            for form in forms[1:]:
                result = wedge(result, form)
            return result
        if node.func in ("iv", "lie"):
            x = self.evaluate(args[0])
            if not isinstance(x, VectorField):
                raise self._fail(f"{node.func}() expects a vector field first, got {describe(x)}", args[0].span)
            target = self._as_form(self.evaluate(args[1]), args[1].span)
            if node.func == "iv":
                return interior_product(x, target)
            if target.degree == 0:
                return x.apply(target.as_function())
            return lie_derivative(x, target)
        if node.func == "pullback":
            phi = self.evaluate(args[0])
            if not isinstance(phi, DiffeoJet):
                raise self._fail(f"pullback() expects a map first, got {describe(phi)}", args[0].span)
            target = self.evaluate(args[1])
            if isinstance(target, (Scalar, Jet)):
                return phi.pull(self._as_jet(target, args[1].span))
            return pullback(phi, self._as_form(target, args[1].span))
        if node.func == "exp":
            return jet_exp(self._jet(args[0]))
        if node.func == "log":
            return jet_log(self._jet(args[0]))
        raise self._fail(f"unknown function '{node.func}'", node.span)

    # ------------------------------------------------------------------ logform{...}

    def _summands(self, node: Expr, sign: int = 1) -> List[Tuple[int, Expr]]:
        if isinstance(node, BinOp) and node.op in "+-":
            return self._summands(node.left, sign) + self._summands(node.right, sign if node.op == "+" else -sign)
        if isinstance(node, Neg):
            return self._summands(node.operand, -sign)
        return [(sign, node)]

    @staticmethod
    def _split_coefficient(node: Expr) -> Tuple[Expr, ...]:
        """(coefficient, call) for `c*dlog(f)` / `c*d(...)`, or (call,) alone."""
        if isinstance(node, Call):
            return (node,)
        if isinstance(node, BinOp) and node.op == "*":
            if isinstance(node.right, Call) and node.right.func in ("dlog", "d"):
                return (node.left, node.right)
            if isinstance(node.left, Call) and node.left.func in ("dlog", "d"):
                return (node.right, node.left)
        return ()

    def _scalar(self, node: Expr) -> Scalar:
        value = self.evaluate(node)
        if not isinstance(value, Scalar):
            raise self._fail(f"expected a scalar coefficient, got {describe(value)}", node.span)
        return value

    def _log_form(self, node: LogFormLit) -> LogForm:
        field = self.context.field
        branches: List[Branch] = []
        exact: List[Tuple[Scalar, Expr]] = []
        for sign, term in self._summands(node.body):
            parts = self._split_coefficient(term)
            if not parts:
                raise self._fail("logform terms are c*dlog(f) or d(H / prod f_j^n_j)", term.span)
            call = parts[-1]
            assert isinstance(call, Call)
            coeff = self._scalar(parts[0]) if len(parts) == 2 else field.one()
            if sign < 0:
                coeff = -coeff
            if call.func == "dlog":
                branches.append(Branch(coeff, self._jet(call.args[0])))
            elif call.func == "d":
                exact.append((coeff, call.args[0]))
            else:
                raise self._fail(f"{call.func}() is not allowed inside logform{{...}}", call.span)
        if not branches:
            raise self._fail("logform{...} needs at least one dlog term", node.span)
        if len(exact) > 1:
            raise self._fail("logform{...} takes a single exact part d(...)", node.span)
        numerator = self.ambient.zero()
        if exact:
            coeff, inner = exact[0]
            numerator, branches = self._exact_part(inner, branches)
            numerator = numerator.scale(coeff)
        return LogForm(tuple(branches), numerator)

    def _exact_part(self, inner: Expr, branches: List[Branch]) -> Tuple[Jet, List[Branch]]:
        if not (isinstance(inner, BinOp) and inner.op == "/"):
            return self._jet(inner), branches
        numerator = self._jet(inner.left)
        factors: List[Expr] = []
        stack = [inner.right]
        while stack:
            item = stack.pop()
            if isinstance(item, BinOp) and item.op == "*":
                stack.extend([item.right, item.left])
            else:
                factors.append(item)
        excess = [0] * len(branches)
        for factor in factors:
            base, k = factor, 1
            if isinstance(factor, BinOp) and factor.op == "^":
                base, k = factor.left, self._integer(factor.right)
            f = self._jet(base)
            match = next((j for j, b in enumerate(branches) if b.f == f), None)
            if match is None or k < 0:
                raise self._fail("denominators of the exact part must be powers of the dlog branches", factor.span)
            excess[match] += k
        return numerator, [Branch(b.residue, b.f, excess[j]) for j, b in enumerate(branches)]


def evaluate(node: Expr, context: Context) -> Value:
    return Evaluator(context).evaluate(node)


def evaluate_source(source: str, context: Context) -> Value:
    """Parse and evaluate DSL source in the given ambient."""
    return evaluate(parse(source, context), context)


def expect(value: Value, kind: str, what: str = "input", context: Optional[Context] = None) -> Value:
    """Check a value against the kind a command needs.

    Functions are promoted to 0-forms; with a context, scalars are promoted to constant functions.
    """
    if kind == "scalar" and isinstance(value, Scalar):
        return value
    if isinstance(value, Scalar) and context is not None and kind in ("jet", "form"):
        value = Jet.constant(context.field, context.n_vars, context.order, value)
    if kind == "jet" and isinstance(value, Jet):
        return value
    if kind == "form":
        if isinstance(value, PForm):
            return value
        if isinstance(value, Jet):
            return PForm.function(value)
    if kind == "field" and isinstance(value, VectorField):
        return value
    if kind == "map" and isinstance(value, DiffeoJet):
        return value
    if kind == "logform" and isinstance(value, LogForm):
        return value
    raise DSLEvalError(f"{what}: expected {KIND_NAMES[kind]}, got {describe(value)}")

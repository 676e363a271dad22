"""
Tests for the expression language: tokenizer, parser, printer and evaluator.
"""

import random
from fractions import Fraction

import pytest

from src.calculus import DiffeoJet, PForm, VectorField
from src.coeff import GAUSSIAN, CyclotomicField, Scalar
from src.dsl import Context, evaluate_source, expect, parse, print_expr, tokenize
from src.dsl.nodes import BinOp, Call, FieldLit, LogFormLit, MapLit, Name, Neg, Number
from src.errors import DSLEvalError, DSLParseError
from src.jets import Ambient, jet_exp, jet_unit_inverse
from src.logforms import LogForm


pytestmark = pytest.mark.unit

CTX = Context(2, 4, GAUSSIAN)
PLANE = Ambient(GAUSSIAN, 2, 4)


def ev(source, context=CTX):
    return evaluate_source(source, context)


# ============================================================================
# Tokenizer and parser
# ============================================================================

def test_tokenize_kinds():
    tokens = tokenize("3*x^2 + 2.5")
    assert [t.kind for t in tokens] == ["NUMBER", "OP", "IDENT", "OP", "NUMBER", "OP", "FLOAT", "EOF"]
    assert str(tokens[2].span) == "1:3"


def test_tokenize_tracks_lines():
    tokens = tokenize("x +\n  y")
    assert str(tokens[2].span) == "2:3"


def test_unexpected_character():
    with pytest.raises(DSLParseError) as excinfo:
        tokenize("x $ y")
    assert (excinfo.value.line, excinfo.value.col) == (1, 3)


def test_precedence():
    """Power binds tighter than unary minus, which binds tighter than products."""
    tree = parse("-x^2 + y*x", CTX)
    assert tree == BinOp(
        "+",
        Neg(BinOp("^", Name("x"), Number(2))),
        BinOp("*", Name("y"), Name("x")),
    )


def test_power_is_right_associative():
    assert parse("x^2^3", CTX) == BinOp("^", Name("x"), BinOp("^", Number(2), Number(3)))


@pytest.mark.parametrize(
    "source,line,col",
    [
        ("wedge(dx,", 1, 10),
        ("x y", 1, 3),
        ("(x + y", 1, 7),
        ("d(x, y)", 1, 1),
        ("wedge(dx)", 1, 1),
        ("w + x", 1, 1),
        ("x + z", 1, 5),
        ("x +\n  2.5", 2, 3),
    ],
)
def test_parse_errors_are_positioned(source, line, col):
    """Errors point at the offending token, 1-based."""
    with pytest.raises(DSLParseError) as excinfo:
        parse(source, CTX)
    assert (excinfo.value.line, excinfo.value.col) == (line, col)


def test_indexed_names_beyond_three_variables():
    context = Context(4, 3, GAUSSIAN)
    assert parse("z4 + dz1", context) == BinOp("+", Name("z4"), Name("dz1"))
    with pytest.raises(DSLParseError):
        parse("x", context)


def test_float_literal_needs_float_field():
    with pytest.raises(DSLParseError):
        parse("1.5*x", CTX)


# ============================================================================
# Printer
# ============================================================================

LEAVES = ["x", "y", "dx", "dy", "i"]


def random_tree(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return Number(rng.randint(0, 9))
        return Name(rng.choice(LEAVES))
    kind = rng.randrange(7)
    if kind == 0:
        return Neg(random_tree(rng, depth - 1))
    if kind in (1, 2):
        op = rng.choice(["+", "-", "*", "/", "^"])
        return BinOp(op, random_tree(rng, depth - 1), random_tree(rng, depth - 1))
    if kind == 3:
        func = rng.choice(["d", "exp", "log", "dlog"])
        return Call(func, (random_tree(rng, depth - 1),))
    if kind == 4:
        func = rng.choice(["wedge", "iv", "lie", "pullback"])
        return Call(func, (random_tree(rng, depth - 1), random_tree(rng, depth - 1)))
    if kind == 5:
        items = tuple(random_tree(rng, depth - 1) for _ in range(2))
        return MapLit(items) if rng.random() < 0.5 else FieldLit(items)
    return LogFormLit(random_tree(rng, depth - 1))


def test_print_then_parse_is_identity():
    """Random trees survive a print/parse cycle unchanged."""
    rng = random.Random(7)
    for _ in range(300):
        tree = random_tree(rng, 4)
        text = print_expr(tree)
        assert parse(text, CTX) == tree, text


@pytest.mark.parametrize(
    "tree,text",
    [
        (BinOp("-", Name("x"), Neg(Name("y"))), "x - -y"),
        (BinOp("^", Neg(Name("x")), Number(2)), "(-x)^2"),
        (BinOp("*", BinOp("+", Name("x"), Number(1)), Name("y")), "(x + 1)*y"),
        (BinOp("-", Name("x"), BinOp("-", Name("y"), Number(1))), "x - (y - 1)"),
        (LogFormLit(Call("dlog", (Name("x"),))), "logform{ dlog(x) }"),
    ],
)
def test_minimal_parentheses(tree, text):
    assert print_expr(tree) == text


# ============================================================================
# Evaluator
# ============================================================================

def test_evaluate_function():
    x, y = PLANE.variables()
    assert ev("x*y + 1") == x * y + 1
    assert ev("1/(1 - x)") == jet_unit_inverse(1 - x)
    assert ev("exp(x)") == jet_exp(x)


def test_evaluate_scalars():
    assert ev("2/3") == Fraction(2, 3)
    assert ev("i^2") == -1
    cyclo3 = CyclotomicField(3)
    assert ev("zeta3", Context(2, 4, cyclo3)) == cyclo3.zeta()


def test_evaluate_forms():
    x, y = PLANE.variables()
    assert ev("d(x*y)") == PForm.one_form([y, x])
    assert ev("wedge(dx, dy)") == PForm.volume(PLANE)
    assert ev("y*dx - x*dy") == PForm.one_form([y, -x])


def test_evaluate_fields_and_maps():
    x, y = PLANE.variables()
    assert ev("field[y, -x]") == VectorField([y, -x])
    assert ev("[x + y^2, y]") == DiffeoJet([x + y * y, y])
    assert ev("pullback([y, x], x)") == y
    assert ev("iv(field[x, y], dx)") == x
    assert ev("lie(field[x, y], x*y)") == 2 * x * y


def test_evaluate_logform():
    x, y = PLANE.variables()
    form = ev("logform{ dlog(x) + 2*dlog(y) }")
    assert isinstance(form, LogForm)
    assert form.residues == (1, 2)


def test_evaluate_logform_with_exact_part():
    """The exact part names its denominators through the dlog branches."""
    x, y = PLANE.variables()
    form = ev("logform{ 5*dlog(x) + d(y/x) }")
    assert form.branches[0].excess == 1
    assert form.numerator == y


@pytest.mark.parametrize(
    "source",
    [
        "dx*dy",
        "1/x",
        "dlog(x)",
        "logform{ x }",
        "field[x, y]^2",
        "x^(1/2)",
        "zeta3",
        "iv(x, dx)",
    ],
)
def test_evaluation_errors(source):
    with pytest.raises(DSLEvalError):
        ev(source)


def test_expect_promotes_values():
    x, _ = PLANE.variables()
    assert isinstance(expect(x, "form"), PForm)
    promoted = expect(GAUSSIAN.coerce(3), "jet", context=CTX)
    assert promoted == 3 + PLANE.zero()
    with pytest.raises(DSLEvalError):
        expect(x, "map")


def test_canonical_text_reevaluates(plane, jet_factory):
    """to_dsl() output evaluates back to the same object."""
    context = Context(plane.n_vars, plane.order, plane.field)
    for _ in range(10):
        jet = jet_factory(plane)
        value = expect(evaluate_source(jet.to_dsl(), context), "jet", context=context)
        assert value == jet
    x, y = plane.variables()
    form = PForm.one_form([jet_factory(plane) + x**4, jet_factory(plane) + y**4])
    assert evaluate_source(form.to_dsl(), context) == form


def test_scalar_values_are_scalars():
    assert isinstance(ev("3"), Scalar)

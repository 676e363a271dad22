"""
Tests for truncated power series arithmetic.
"""

from fractions import Fraction

import pytest

from src.coeff import GAUSSIAN, CyclotomicField, GaussianRational
from src.errors import AmbientMismatchError, FieldMismatchError, JetError
from src.jets import (
    Ambient,
    Jet,
    default_names,
    jet_compose,
    jet_exp,
    jet_log,
    jet_nth_root,
    jet_unit_inverse,
    linear_substitution,
    monomials_of_degree,
    monomials_up_to,
)


pytestmark = pytest.mark.unit


@pytest.mark.parametrize("n,degree,count", [(1, 4, 1), (2, 3, 4), (3, 2, 6), (4, 3, 20)])
def test_monomial_counts(n, degree, count):
    """Degree-d monomials in n variables number C(n + d - 1, d)."""
    assert len(monomials_of_degree(n, degree)) == count
    assert all(sum(e) == degree for e in monomials_of_degree(n, degree))


def test_monomials_up_to_is_graded(plane):
    exps = monomials_up_to(2, 3)
    assert exps[0] == (0, 0)
    assert [sum(e) for e in exps] == sorted(sum(e) for e in exps)
    assert len(monomials_up_to(2, 3, 2)) == 3 + 4


def test_truncation_drops_high_degrees():
    jet = Jet(GAUSSIAN, 2, 2, {(1, 0): 1, (2, 1): 5})
    assert jet.n_terms() == 1
    assert jet.max_degree() == 1


def test_basic_products(plane):
    x, y = plane.variables()
    f = (x + y) ** 2
    assert f == x**2 + 2 * x * y + y**2
    assert f.is_homogeneous()
    assert f.valuation() == 2
    assert f[(1, 1)] == 2


def test_product_respects_order():
    amb = Ambient(GAUSSIAN, 1, 3)
    x = amb.var(0)
    assert (x**2 * x**2).is_zero()


def test_equality_at_common_order():
    """Jets of different orders compare at the smaller order."""
    low = Ambient(GAUSSIAN, 2, 2)
    high = Ambient(GAUSSIAN, 2, 4)
    assert low.var(0) == high.var(0) + high.var(1) ** 3
    assert high.var(0) != high.var(0) + high.var(1) ** 3


def test_mixed_order_arithmetic_flags_mismatch():
    low = Ambient(GAUSSIAN, 2, 2).var(0)
    high = Ambient(GAUSSIAN, 2, 4).var(1)
    total = low + high
    assert total.order == 2
    assert total.order_mismatch


def test_mixed_ambients_raise(plane, space, cyclo3):
    with pytest.raises(AmbientMismatchError):
        plane.var(0) + space.var(0)
    with pytest.raises(FieldMismatchError):
        plane.var(0) + Ambient(cyclo3, 2, 6).var(0)


def test_unit_inverse(plane, jet_factory):
    """u * u^{-1} = 1 for random units."""
    for _ in range(5):
        u = jet_factory(plane, 1) + 3
        assert u * jet_unit_inverse(u) == 1


def test_unit_inverse_needs_unit(plane):
    with pytest.raises(JetError):
        jet_unit_inverse(plane.var(0))


def test_geometric_series():
    amb = Ambient(GAUSSIAN, 1, 5)
    x = amb.var(0)
    inverse = jet_unit_inverse(1 - x)
    assert inverse == amb.jet({(k,): 1 for k in range(6)})


def test_exp_log_inverse(plane, jet_factory):
    for _ in range(4):
        f = jet_factory(plane, 1)
        assert jet_log(jet_exp(f)) == f


def test_exp_is_additive(plane):
    x, y = plane.variables()
    assert jet_exp(x) * jet_exp(y) == jet_exp(x + y)


def test_exp_coefficients():
    amb = Ambient(GAUSSIAN, 1, 4)
    assert jet_exp(amb.var(0)) == amb.jet({(k,): Fraction(1, [1, 1, 2, 6, 24][k]) for k in range(5)})


def test_log_needs_unit_constant(plane):
    with pytest.raises(JetError):
        jet_log(plane.var(0) + 2)
    with pytest.raises(JetError):
        jet_exp(plane.var(0) + 1)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_nth_root(plane, k):
    x, y = plane.variables()
    u = (1 + x + x * y) * 4**k
    root = jet_nth_root(u, k)
    assert root**k == u
    assert root.constant_term() == 4


def test_nth_root_needs_root_of_constant(plane):
    with pytest.raises(JetError):
        jet_nth_root(plane.var(0) + 2, 2)


def test_compose(plane):
    x, y = plane.variables()
    f = x * y + y**2
    composed = jet_compose(f, [x + y, y])
    assert composed == (x + y) * y + y**2
    assert f.compose([y, x]) == x * y + x**2


def test_compose_requires_zero_constant(plane):
    x, y = plane.variables()
    with pytest.raises(JetError):
        jet_compose(x, [x + 1, y])
    with pytest.raises(JetError):
        jet_compose(x, [x])


def test_compose_is_associative(plane, jet_factory):
    f = jet_factory(plane, 0)
    g = [jet_factory(plane, 1), jet_factory(plane, 1)]
    h = [jet_factory(plane, 1), jet_factory(plane, 1)]
    left = jet_compose(jet_compose(f, g), h)
    right = jet_compose(f, [jet_compose(gi, h) for gi in g])
    assert left == right


def test_derivative_lowers_order(plane):
    x, y = plane.variables()
    f = x**3 * y + 2 * y**2
    fx = f.derivative(0)
    assert fx.order == plane.order - 1
    assert fx == 3 * x**2 * y
    assert f.derivative(1) == x**3 + 4 * y


def test_derivative_of_order_zero_jet():
    with pytest.raises(JetError):
        Jet(GAUSSIAN, 1, 0, {(0,): 1}).derivative(0)


def test_leibniz_rule(plane, jet_factory):
    f, g = jet_factory(plane), jet_factory(plane)
    assert (f * g).derivative(0) == f.derivative(0) * g + f * g.derivative(0)


def test_scale_by_degree(plane):
    x, y = plane.variables()
    f = 1 + x + x * y
    assert f.scale_by_degree(2) == 1 + 2 * x + 4 * x * y


def test_divide_by_monomial(plane):
    x, y = plane.variables()
    f = x**2 * y + x**3
    assert f.divide_by_monomial((2, 0)) == y + x
    with pytest.raises(JetError):
        f.divide_by_monomial((0, 1))


def test_linear_substitution(plane):
    x, y = plane.variables()
    f = x**2 - y
    swapped = linear_substitution(f, [[0, 1], [1, 0]])
    assert swapped == y**2 - x


def test_evaluate_exact_and_complex(plane):
    x, y = plane.variables()
    f = x * y + y * GaussianRational(0, 1)
    assert f.evaluate([GaussianRational(2), GaussianRational(3)]) == GaussianRational(6, 3)
    assert f.evaluate([2j, 1 + 0j]) == pytest.approx(3j)


@pytest.mark.parametrize(
    "terms,expected",
    [
        ({(1, 0): 1, (0, 1): -1}, "x - y"),
        ({(2, 1): Fraction(3, 2)}, "3/2*x^2*y"),
        ({(0, 0): -1, (1, 0): 2}, "-1 + 2*x"),
        ({}, "0"),
        ({(0, 1): GaussianRational(0, 1)}, "(i)*y"),
    ],
)
def test_to_dsl(plane, terms, expected):
    assert plane.jet(terms).to_dsl() == expected


def test_to_dsl_cyclotomic(cyclo3):
    amb = Ambient(cyclo3, 1, 3)
    assert (amb.var(0) * cyclo3.zeta()).to_dsl() == "(zeta3)*x"


@pytest.mark.parametrize("n,names", [(1, ["x"]), (3, ["x", "y", "z"]), (4, ["z1", "z2", "z3", "z4"])])
def test_default_names(n, names):
    assert default_names(n) == names


def test_leading_form(plane):
    x, y = plane.variables()
    f = x**2 + x * y + y**4
    assert f.leading_form() == x**2 + x * y
    assert plane.zero().valuation() is None
    assert f.homogeneous_part(4) == y**4
    assert f.homogeneous_part(3).is_zero()


def test_cyclotomic_coefficients():
    field = CyclotomicField(3)
    amb = Ambient(field, 1, 4)
    x = amb.var(0)
    z = field.zeta()
    assert (x.scale(z)) ** 3 == x**3

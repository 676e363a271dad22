"""
Tests for flows, logarithms, Jordan decomposition and linearization of diffeomorphism jets.
"""

import cmath
from fractions import Fraction

import pytest

from src.calculus import DiffeoJet, VectorField
from src.coeff import F64, GAUSSIAN, CyclotomicField
from src.errors import (
    GermCalcError,
    JetError,
    NonNilpotentFlowError,
    NotUnipotentError,
    ResonanceError,
    TwistedEquationError,
)
from src.germdiff import (
    ResonantTerm,
    commutes,
    conjugate,
    diffeo_log,
    flow_at,
    formal_flow,
    graded_split,
    jordan_decompose,
    poincare_linearize,
    solve_twisted_equation,
    t_degree_bound,
)
from src.jets import Ambient, jet_exp, jet_unit_inverse, monomials_up_to
from tests.conftest import random_jet, random_rational


pytestmark = pytest.mark.unit

LINE = Ambient(GAUSSIAN, 1, 6)
PLANE = Ambient(GAUSSIAN, 2, 5)


# ============================================================================
# Flows and logarithms
# ============================================================================

def test_linear_nilpotent_flow():
    """exp(t y d/dx) = (x + t y, y)."""
    x, y = PLANE.variables()
    flow = formal_flow(VectorField([y, PLANE.zero()]))
    assert flow.t_degree() == 1
    assert flow.evaluate(2) == DiffeoJet([x + 2 * y, y])
    assert flow.evaluate(0).is_identity()


def test_flow_degree_within_bound():
    x, y = PLANE.variables()
    flow = formal_flow(VectorField([y + x * x, y * y]))
    assert flow.t_degree() <= flow.t_degree_bound()
    assert flow.t_degree_bound() == t_degree_bound(2, PLANE.order)


@pytest.mark.parametrize("s,t", [(1, 1), (2, -3), (Fraction(1, 2), Fraction(3, 2))])
def test_flow_is_one_parameter_group(s, t):
    x, y = PLANE.variables()
    flow = formal_flow(VectorField([y + x * x, y * y]))
    assert flow.evaluate(s).compose(flow.evaluate(t)) == flow.evaluate(s + t)


def test_flow_velocity_at_zero_is_field():
    x, y = PLANE.variables()
    field = VectorField([y + x * x, y * y])
    velocity = formal_flow(field).velocity(0)
    assert velocity[0] == y + x * x
    assert velocity[1] == y * y


def test_flow_preconditions():
    x, y = PLANE.variables()
    with pytest.raises(NonNilpotentFlowError):
        formal_flow(VectorField.radial(PLANE))
    with pytest.raises(JetError):
        formal_flow(VectorField([y + 1, x * x]))
    with pytest.raises(NonNilpotentFlowError):
        flow_at(VectorField.radial(PLANE), 1)


def test_float_flow_of_radial_field():
    """exp(R) = e * id."""
    ambient = Ambient(F64, 2, 3)
    diffeo = flow_at(VectorField.radial(ambient), 1)
    assert cmath.isclose(diffeo.components[0][(1, 0)].to_complex(), cmath.e, rel_tol=1e-9)
    assert diffeo.components[0][(0, 1)].is_negligible(1e-12)


def test_flow_to_dsl_mentions_t():
    x, y = PLANE.variables()
    text = formal_flow(VectorField([y, PLANE.zero()])).to_dsl()
    assert text == "[(1)*x + (1*t^1)*y, (1)*y]"


def test_log_inverts_flow():
    x, y = PLANE.variables()
    field = VectorField([y + x * x, y * y + x * y * y])
    assert diffeo_log(formal_flow(field).evaluate(1)) == field


def test_log_of_unipotent_map():
    """exp(log phi) = phi."""
    x, y = PLANE.variables()
    phi = DiffeoJet([x + y + x * y, y + x * x])
    field = diffeo_log(phi)
    assert formal_flow(field).evaluate(1) == phi


def test_log_needs_unipotent():
    with pytest.raises(NotUnipotentError):
        diffeo_log(DiffeoJet.dilation(PLANE, 2))


# ============================================================================
# Jordan decomposition and linearization
# ============================================================================

def test_jordan_with_resonance():
    """(4x + y^2, 2y): y^2 is resonant, phi_S = diag(4, 2)."""
    x, y = PLANE.variables()
    phi = DiffeoJet([4 * x + y * y, 2 * y])
    jordan = jordan_decompose(phi)
    assert jordan.semisimple == DiffeoJet.linear(PLANE, [[4, 0], [0, 2]])
    assert jordan.unipotent == DiffeoJet([x + y * y * Fraction(1, 4), y])
    assert jordan.semisimple.compose(jordan.unipotent) == phi
    assert commutes(jordan.semisimple, jordan.unipotent)
    assert jordan.unipotent.is_unipotent()
    assert ResonantTerm(2, 0, (0, 2), GAUSSIAN.one()) in jordan.resonant_terms


def test_jordan_without_resonance():
    x, y = PLANE.variables()
    phi = DiffeoJet([2 * x + x * x, 3 * y + x * y])
    jordan = jordan_decompose(phi)
    assert not jordan.resonant_terms
    assert jordan.unipotent.is_identity()
    assert jordan.semisimple == phi
    linearized = conjugate(jordan.linearizing_witness, jordan.semisimple)
    assert linearized == DiffeoJet.linear(PLANE, [[2, 0], [0, 3]])


def test_poincare_linearization_in_one_variable():
    x = LINE.var(0)
    phi = DiffeoJet([2 * x + x * x])
    g = poincare_linearize(phi)
    assert g.components[0][(1,)] == 1
    assert g.components[0][(2,)] == Fraction(1, 2)
    assert conjugate(g, phi) == DiffeoJet.dilation(LINE, 2)


def test_poincare_linearization_two_variables():
    x, y = PLANE.variables()
    phi = DiffeoJet([3 * x + y * y, 3 * y + x * x * y])
    g = poincare_linearize(phi)
    assert conjugate(g, phi) == DiffeoJet.dilation(PLANE, 3)


@pytest.mark.parametrize("rho", [1, -1, GAUSSIAN.i()])
def test_poincare_linearization_rejects_roots_of_unity(rho):
    x = LINE.var(0)
    with pytest.raises(ResonanceError):
        poincare_linearize(DiffeoJet([x.scale(rho) + x * x]))


def test_poincare_linearization_needs_scalar_linear_part():
    x, y = PLANE.variables()
    with pytest.raises(GermCalcError):
        poincare_linearize(DiffeoJet([2 * x, 3 * y]))


# ============================================================================
# Twisted equation and graded splitting
# ============================================================================

def test_twisted_equation_for_involution():
    """v(-x) = e^x v(x) is solved by v = exp(-x/2)."""
    x = LINE.var(0)
    s = DiffeoJet.dilation(LINE, -1)
    v = solve_twisted_equation(s, jet_exp(x))
    assert v == jet_exp(x.scale(Fraction(-1, 2)))
    assert s.pull(v) == jet_exp(x) * v


@pytest.mark.parametrize(
    "w",
    [
        lambda x: x + 2,
        lambda x: x + 1,
        lambda x: x * x + 1,
    ],
)
def test_twisted_equation_obstructions(w):
    x = LINE.var(0)
    with pytest.raises(TwistedEquationError):
        solve_twisted_equation(DiffeoJet.dilation(LINE, -1), w(x))


def test_twisted_equation_needs_finite_order():
    x = LINE.var(0)
    with pytest.raises(TwistedEquationError):
        solve_twisted_equation(DiffeoJet.dilation(LINE, 2), jet_exp(x))


def test_graded_split():
    x, y = PLANE.variables()
    split = graded_split(VectorField([x * x + x**3, y]), 2)
    assert split.parts[0] == VectorField([x**3, y])
    assert split.parts[1] == VectorField([x * x, PLANE.zero()])
    assert split.nonzero_classes == (0, 1)
    assert split.lowest_degree == 1


def test_graded_split_eigen_relation():
    x, _ = PLANE.variables()
    homogeneous = graded_split(VectorField([x * x, PLANE.zero()]), 2, lam=GAUSSIAN.coerce(-1))
    assert homogeneous.delta == -1
    assert homogeneous.eigen_relation
    mixed = graded_split(VectorField([x * x + x**3, PLANE.zero()]), 2, lam=GAUSSIAN.coerce(-1))
    assert not mixed.eigen_relation


def test_commutes():
    x, y = PLANE.variables()
    dilation = DiffeoJet.dilation(PLANE, 2)
    assert commutes(dilation, DiffeoJet.linear(PLANE, [[1, 1], [0, 1]]))
    assert not commutes(dilation, DiffeoJet([x + y * y, y]))


# ============================================================================
# Random germs
# ============================================================================

def random_unit(rng, ambient, generator):
    """1 + higher terms with coefficients a + b * generator."""
    terms = {
        exp: ambient.scalar(random_rational(rng)) + generator * random_rational(rng)
        for exp in monomials_up_to(ambient.n_vars, ambient.order, 1)
        if rng.random() < 0.5
    }
    return ambient.jet(terms) + 1


def random_germ(rng, ambient, linear):
    """Linear part `linear` plus random terms of degree 2 and up."""
    head = DiffeoJet.linear(ambient, linear)
    return DiffeoJet(
        [c + random_jet(rng, ambient, 2, ambient.order) for c in head.components]
    )


@pytest.mark.slow
@pytest.mark.parametrize(
    "r,field,lam",
    [
        (2, GAUSSIAN, GAUSSIAN.from_rational(-1)),
        (3, CyclotomicField(3), CyclotomicField(3).zeta()),
        (4, GAUSSIAN, GAUSSIAN.i()),
    ],
)
def test_twisted_equation_on_coboundaries(rng, r, field, lam):
    """For w = (u o S) / u the solution differs from u by an S-invariant unit."""
    ambient = Ambient(field, 2, 5)
    s = DiffeoJet.dilation(ambient, lam)
    generator = GAUSSIAN.i() if field == GAUSSIAN else field.zeta()
    for _ in range(10):
        u = random_unit(rng, ambient, generator)
        w = s.pull(u) * jet_unit_inverse(u)
        v = solve_twisted_equation(s, w)
        assert v.constant_term().is_one()
        assert s.pull(v) == w * v
        ratio = v * jet_unit_inverse(u)
        assert s.pull(ratio) == ratio


@pytest.mark.slow
def test_jordan_decomposition_of_random_germs(rng):
    """With linear part diag(4, 2) the y^2 term in the first component is resonant."""
    for _ in range(20):
        phi = random_germ(rng, PLANE, [[4, 0], [0, 2]])
        jordan = jordan_decompose(phi)
        assert jordan.semisimple.compose(jordan.unipotent) == phi
        assert commutes(jordan.semisimple, jordan.unipotent)
        assert jordan.unipotent.is_unipotent()
        assert jordan.semisimple.linear_part() == phi.linear_part()
        plain = random_germ(rng, PLANE, [[2, 0], [0, 3]])
        assert jordan_decompose(plain).unipotent.is_identity()


@pytest.mark.slow
def test_poincare_linearization_of_random_germs(rng):
    for _ in range(20):
        phi = random_germ(rng, PLANE, [[2, 0], [0, 2]])
        g = poincare_linearize(phi)
        assert g.linear_part() == DiffeoJet.identity(PLANE).linear_part()
        assert conjugate(g, phi) == DiffeoJet.dilation(PLANE, 2)


def test_flow_group_law_at_random_times(rng):
    x, y = PLANE.variables()
    flow = formal_flow(VectorField([y + x * x, y * y]))
    for _ in range(20):
        s, t = random_rational(rng), random_rational(rng)
        assert flow.evaluate(s).compose(flow.evaluate(t)) == flow.evaluate(s + t)

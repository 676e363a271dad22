"""
Tests for forms, vector fields and diffeomorphism jets.
"""

import pytest

from src.calculus import (
    DiffeoJet,
    PForm,
    VectorField,
    closedness_residual,
    exterior_d,
    homogeneous_integrating_factor,
    integrability_check,
    interior_product,
    lie_derivative,
    pullback,
    pushforward_field,
    quasi_homogeneity_check,
    wedge,
)
from src.errors import (
    AmbientMismatchError,
    FormDegreeError,
    JetError,
    NonHomogeneousError,
    SingularLinearPartError,
)
from tests.conftest import random_gaussian


pytestmark = pytest.mark.unit


def differentials(ambient):
    return [PForm.differential(ambient, i) for i in range(ambient.n_vars)]


# ============================================================================
# Exterior algebra
# ============================================================================

def test_wedge_is_alternating(plane):
    dx, dy = differentials(plane)
    assert wedge(dx, dy).component((0, 1)) == 1
    assert wedge(dy, dx).component((0, 1)) == -1
    assert wedge(dx, dx).is_zero()


def test_one_form_wedge_itself_vanishes(space, jet_factory):
    omega = PForm.one_form([jet_factory(space) for _ in range(3)])
    assert wedge(omega, omega).is_zero()


def test_wedge_above_top_degree(plane):
    dx, dy = differentials(plane)
    assert wedge(wedge(dx, dy), dx).is_zero()


@pytest.mark.parametrize("degree", [0, 1])
def test_d_squared_is_zero(space, jet_factory, degree):
    if degree == 0:
        form = PForm.function(jet_factory(space))
    else:
        form = PForm.one_form([jet_factory(space) for _ in range(3)])
    assert exterior_d(exterior_d(form)).is_zero()


def test_d_lowers_order(plane, jet_factory):
    form = PForm.function(jet_factory(plane))
    assert exterior_d(form).order == plane.order - 1
    assert exterior_d(exterior_d(form)).order == plane.order - 2


def test_leibniz_for_functions(plane, jet_factory):
    f, g = jet_factory(plane), jet_factory(plane)
    lhs = exterior_d(PForm.function(f * g))
    rhs = exterior_d(PForm.function(f)).multiply(g) + exterior_d(PForm.function(g)).multiply(f)
    assert lhs == rhs


def test_interior_product_of_conical_form(plane):
    x, y = plane.variables()
    eta = PForm.one_form([-y, x])
    radial = VectorField.radial(plane)
    assert interior_product(radial, eta).is_zero()


def test_interior_product_of_zero_form(plane):
    with pytest.raises(FormDegreeError):
        interior_product(VectorField.radial(plane), PForm.function(plane.one()))


def test_lie_derivative_of_function_is_derivation(plane, jet_factory):
    f = jet_factory(plane)
    x, y = plane.variables()
    field = VectorField([y, x * x])
    assert lie_derivative(field, PForm.function(f)).as_function() == field.apply(f)


def test_cartan_on_volume(plane):
    """L_R (dx ^ dy) = 2 dx ^ dy for the radial field."""
    vol = PForm.volume(plane)
    assert lie_derivative(VectorField.radial(plane), vol) == vol.multiply(2)


# ============================================================================
# Vector fields and diffeomorphisms
# ============================================================================

def test_vector_field_needs_all_components(plane):
    with pytest.raises(AmbientMismatchError):
        VectorField([plane.var(0)])


def test_bracket(plane):
    x, y = plane.variables()
    left = VectorField([x, plane.zero()])
    right = VectorField([plane.zero(), x * x])
    assert left.bracket(right) == VectorField([plane.zero(), 2 * x * x])
    assert right.bracket(left) == VectorField([plane.zero(), -2 * x * x])


def test_diffeo_preconditions(plane):
    x, y = plane.variables()
    with pytest.raises(JetError):
        DiffeoJet([x + 1, y])
    with pytest.raises(SingularLinearPartError):
        DiffeoJet([x + y, 2 * x + 2 * y + x * x])


def test_diffeo_inverse(plane):
    x, y = plane.variables()
    phi = DiffeoJet([x + y * y, 2 * y + x * x])
    assert phi.compose(phi.inverse()).is_identity()
    assert phi.inverse().compose(phi).is_identity()


def test_diffeo_power(plane):
    x, y = plane.variables()
    phi = DiffeoJet([x + x * y, y + x * x])
    assert phi.power(3) == phi.compose(phi).compose(phi)
    assert phi.power(-1) == phi.inverse()
    assert phi.power(0).is_identity()


def test_compose_means_outer_after_inner(plane):
    """(a o b)(z) = a(b(z))."""
    x, y = plane.variables()
    a = DiffeoJet([x + y * y, y])
    b = DiffeoJet([x, y + x * x])
    assert a.compose(b) == DiffeoJet([x + (y + x * x) ** 2, y + x * x])


def test_unipotent_detection(plane):
    x, y = plane.variables()
    assert DiffeoJet([x + y, y + x * x]).is_unipotent()
    assert not DiffeoJet.dilation(plane, 2).is_unipotent()


def test_pullback_commutes_with_d(plane, jet_factory):
    x, y = plane.variables()
    phi = DiffeoJet([x + x * y, 3 * y + x * x])
    f = jet_factory(plane)
    lhs = pullback(phi, exterior_d(PForm.function(f)))
    rhs = exterior_d(pullback(phi, PForm.function(f)))
    assert lhs == rhs


def test_pullback_is_contravariant(plane, jet_factory):
    """(a o b)^* omega = b^* a^* omega."""
    x, y = plane.variables()
    a = DiffeoJet([x + y * y, y + x * y])
    b = DiffeoJet([2 * x, y + x * x])
    omega = PForm.one_form([jet_factory(plane), jet_factory(plane)])
    assert pullback(a.compose(b), omega) == pullback(b, pullback(a, omega))


def test_pushforward_of_radial_by_dilation(plane):
    radial = VectorField.radial(plane)
    assert pushforward_field(DiffeoJet.dilation(plane, 2), radial) == radial


# ============================================================================
# Checks and certificates
# ============================================================================

def test_non_integrable_form(space):
    x, y, z = space.variables()
    omega = PForm.one_form([z, x, y])
    report = integrability_check(omega)
    assert not report.integrable
    assert report.residuals[0].component((0, 1, 2)) == x + y + z


def test_exact_form_is_integrable(space):
    x, y, z = space.variables()
    omega = exterior_d(PForm.function(x * y * z))
    assert integrability_check(omega).integrable


def test_decomposed_two_form(space):
    dx, dy, _ = differentials(space)
    report = integrability_check(wedge(dx, dy), [dx, dy])
    assert report.integrable
    assert report.decomposes


def test_two_form_needs_decomposition(space):
    dx, dy, _ = differentials(space)
    with pytest.raises(FormDegreeError):
        integrability_check(wedge(dx, dy))


def nonzero_gaussian(rng):
    value = random_gaussian(rng)
    while value.is_zero():
        value = random_gaussian(rng)
    return value


def test_symmetry_is_tangent_or_integrating(space, rng, jet_factory):
    """For a diagonal symmetry X either i_X omega = 0 or omega / i_X omega is closed, never both."""
    x, y, z = space.variables()
    outcomes = {"tangent": 0, "closed": 0}
    for sample in range(50):
        a, b, c = (nonzero_gaussian(rng) for _ in range(3))
        base = PForm.one_form([(y * z).scale(a), (x * z).scale(b), (x * y).scale(c)])
        omega = base.multiply(jet_factory(space, 1, 3) + 1)
        assert integrability_check(omega).integrable
        c1, c2 = random_gaussian(rng), random_gaussian(rng)
        if sample % 2:
            c3 = -(a * c1 + b * c2) / c
        else:
            c3 = nonzero_gaussian(rng)
            while (a * c1 + b * c2 + c * c3).is_zero():
                c3 = nonzero_gaussian(rng)
        symmetry = VectorField([x.scale(c1), y.scale(c2), z.scale(c3)])
        f = interior_product(symmetry, omega).as_function()
        if f.is_zero():
            outcomes["tangent"] += 1
        else:
            assert closedness_residual(omega, f).is_zero()
            outcomes["closed"] += 1
    assert outcomes == {"tangent": 25, "closed": 25}


def test_quasi_homogeneity(plane):
    x, y = plane.variables()
    eta = PForm.one_form([-y, x])
    report = quasi_homogeneity_check(eta, VectorField.radial(plane))
    assert report.weight == 2
    assert report.conical
    weighted = VectorField.linear(plane, [[2, 0], [0, 1]])
    dx = PForm.differential(plane, 0)
    report = quasi_homogeneity_check(dx, weighted)
    assert report.weight == 2
    assert not report.conical


def test_homogeneous_integrating_factor(plane):
    x, y = plane.variables()
    omega = PForm.one_form([y, x])
    certificate = homogeneous_integrating_factor(omega)
    assert certificate.factor == 2 * x * y
    assert certificate.closed


def test_homogeneous_integrating_factor_of_conical_form(plane):
    x, y = plane.variables()
    assert homogeneous_integrating_factor(PForm.one_form([-y, x])) is None


def test_homogeneous_integrating_factor_rejects_mixed_degrees(plane):
    x, _ = plane.variables()
    with pytest.raises(NonHomogeneousError):
        homogeneous_integrating_factor(PForm.one_form([plane.one(), x]))


def test_form_to_dsl(plane):
    x, _ = plane.variables()
    assert PForm.one_form([plane.one(), x]).to_dsl() == "dx + (x)*dy"
    assert PForm.volume(plane).to_dsl() == "wedge(dx, dy)"

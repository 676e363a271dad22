"""
Tests for the linear isotropy of homogeneous tuples.
"""

import pytest

from src.coeff import GAUSSIAN
from src.errors import NonHomogeneousError, SingularMatrixError
from src.jets import Ambient
from src.linalg import to_matrix
from src.rigidity import isotropy_lie_algebra, isotropy_membership, permutation_search


pytestmark = pytest.mark.unit

PLANE = Ambient(GAUSSIAN, 2, 4)


def test_three_lines_are_rigid():
    """(z1, z2, z1 + z2): only scalars preserve each line."""
    x, y = PLANE.variables()
    report = isotropy_lie_algebra([x, y, x + y])
    assert report.dimension == 1
    assert report.rigid_infinitesimal
    assert report.contains_identity
    assert report.bracket_closed
    assert report.permutations == ()
    assert report.rigid_assumed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_coordinate_monomials_have_diagonal_isotropy(n):
    ambient = Ambient(GAUSSIAN, n, 3)
    report = isotropy_lie_algebra(ambient.variables())
    assert report.dimension == n
    assert not report.rigid_infinitesimal
    assert report.contains_identity
    assert report.degrees == (1,) * n


@pytest.mark.parametrize("n", [2, 3, 4])
def test_weighted_monomial_with_sum_is_rigid(n):
    """(z1 z2^2 ... zn^n, z1 + ... + zn) has only scalars in its isotropy algebra."""
    top = n * (n + 1) // 2
    ambient = Ambient(GAUSSIAN, n, top)
    zs = ambient.variables()
    monomial = ambient.one()
    for power, z in enumerate(zs, start=1):
        monomial = monomial * z**power
    total = ambient.zero()
    for z in zs:
        total = total + z
    report = isotropy_lie_algebra([monomial, total])
    assert report.degrees == (top, 1)
    assert report.dimension == 1
    assert report.rigid_infinitesimal
    assert report.contains_identity
    assert report.bracket_closed


def test_product_has_two_dimensional_isotropy():
    x, y = PLANE.variables()
    report = isotropy_lie_algebra([x * y])
    assert report.dimension == 2
    assert report.permutations == ((1, 0),)
    assert not report.rigid_assumed


def test_membership_of_dilation():
    x, y = PLANE.variables()
    alphas = isotropy_membership([x * x, y], to_matrix(GAUSSIAN, [[2, 0], [0, 2]]))
    assert alphas == (4, 2)


def test_membership_fails_for_shear():
    x, y = PLANE.variables()
    shear = to_matrix(GAUSSIAN, [[1, 1], [0, 1]])
    assert isotropy_membership([x, y], shear) is None


def test_membership_rejects_singular_matrix():
    x, y = PLANE.variables()
    with pytest.raises(SingularMatrixError):
        isotropy_membership([x, y], to_matrix(GAUSSIAN, [[1, 1], [1, 1]]))


def test_permutation_search_bound(monkeypatch):
    monkeypatch.setenv("GERMCALC_PERMUTATION_SEARCH_BOUND", "1")
    x, y = PLANE.variables()
    found, complete = permutation_search([x * y])
    assert found == ()
    assert not complete


@pytest.mark.parametrize(
    "polys",
    [
        lambda x, y: [],
        lambda x, y: [x * x + y],
        lambda x, y: [x, PLANE.zero()],
    ],
)
def test_isotropy_needs_homogeneous_tuple(polys):
    x, y = PLANE.variables()
    with pytest.raises(NonHomogeneousError):
        isotropy_lie_algebra(polys(x, y))

"""
Tests for exact linear algebra and in-field eigenvalues.
"""

import pytest

from src.coeff import F64, GAUSSIAN, CyclotomicField, GaussianRational
from src.errors import EigenvalueFieldError, SingularMatrixError
from src.linalg import (
    characteristic_polynomial,
    determinant,
    eigenvalues_in_field,
    generalized_eigenbasis,
    identity,
    inverse,
    matmul,
    matrices_equal,
    nullspace,
    poly_gcd,
    rank,
    roots_in_field,
    solve,
    to_matrix,
)


pytestmark = pytest.mark.unit

I = GaussianRational(0, 1)


def g(*values):
    return [GAUSSIAN.coerce(v) for v in values]


def test_determinant_and_inverse():
    a = to_matrix(GAUSSIAN, [[1, 2], [3, 4]])
    assert determinant(a) == -2
    assert matrices_equal(matmul(a, inverse(a)), identity(GAUSSIAN, 2))


def test_determinant_with_row_swap():
    a = to_matrix(GAUSSIAN, [[0, 1, 0], [1, 0, 0], [0, 0, 5]])
    assert determinant(a) == -5


def test_singular_inverse():
    a = to_matrix(GAUSSIAN, [[1, 2], [2, 4]])
    assert determinant(a) == 0
    with pytest.raises(SingularMatrixError):
        inverse(a)


def test_nullspace_and_rank():
    rows = to_matrix(GAUSSIAN, [[1, 1, 0], [0, 0, 1]])
    basis = nullspace(rows, 3, GAUSSIAN)
    assert basis == [g(-1, 1, 0)]
    assert rank(rows, 3, GAUSSIAN) == 2


def test_solve_consistent_and_inconsistent():
    rows = to_matrix(GAUSSIAN, [[1, 1], [1, -1]])
    assert solve(rows, g(3, 1), GAUSSIAN) == g(2, 1)
    singular = to_matrix(GAUSSIAN, [[1, 1], [2, 2]])
    assert solve(singular, g(1, 3), GAUSSIAN) is None


def test_solve_float():
    rows = to_matrix(F64, [[2, 0], [0, 4]])
    x = solve(rows, [F64.coerce(1), F64.coerce(1)], F64)
    assert x[0].close_to(F64.coerce(0.5), 1e-12)
    assert x[1].close_to(F64.coerce(0.25), 1e-12)


def test_characteristic_polynomial():
    rotation = to_matrix(GAUSSIAN, [[0, -1], [1, 0]])
    assert characteristic_polynomial(rotation) == g(1, 0, 1)


def test_poly_gcd_is_monic():
    left = g(2, -3, 1)  # (x-1)(x-2)
    right = g(-3, 2, 1)  # (x-1)(x+3)
    assert poly_gcd(left, right) == g(-1, 1)


def test_roots_with_multiplicity():
    # (x - 1)^2 (x + i) = x^3 + (i - 2) x^2 + (1 - 2i) x + i
    p = [I, 1 - 2 * I, I - 2, GAUSSIAN.one()]
    assert roots_in_field(p) == {GAUSSIAN.one(): 2, -I: 1}


@pytest.mark.parametrize(
    "rows,expected",
    [
        ([[0, -1], [1, 0]], {I: 1, -I: 1}),
        ([[2, 1], [1, 2]], {GAUSSIAN.coerce(1): 1, GAUSSIAN.coerce(3): 1}),
        ([[2, 1], [0, 2]], {GAUSSIAN.coerce(2): 2}),
    ],
)
def test_eigenvalues_in_gaussian_field(rows, expected):
    assert eigenvalues_in_field(to_matrix(GAUSSIAN, rows)) == expected


def test_eigenvalues_outside_field():
    """sqrt(2) is not in Q(i)."""
    with pytest.raises(EigenvalueFieldError):
        eigenvalues_in_field(to_matrix(GAUSSIAN, [[0, 2], [1, 0]]))


def test_eigenvalues_in_cyclotomic_field():
    """The companion matrix of x^2 + x + 1 has eigenvalues zeta and zeta^2."""
    field = CyclotomicField(3)
    companion = to_matrix(field, [[0, -1], [1, -1]])
    eigs = eigenvalues_in_field(companion)
    assert eigs == {field.zeta(1): 1, field.zeta(2): 1}


def test_generalized_eigenbasis_of_jordan_block():
    block = to_matrix(GAUSSIAN, [[2, 1], [0, 2]])
    columns, labels = generalized_eigenbasis(block)
    assert labels == g(2, 2)
    assert determinant(columns) != 0

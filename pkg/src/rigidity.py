"""
Linear isotropy of a tuple of homogeneous polynomials H = (h_1, ..., h_l).

I(H) = {T in GL(n) : h_j o T = alpha_j h_j}. Its Lie algebra is the solution
space of X_A(h_j) = c_j h_j in (A, c), where X_A is the linear vector field of A.
H is infinitesimally rigid when that space is spanned by the identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from src.coeff import Field, Scalar
from src.config import get_config
from src.errors import AmbientMismatchError, NonHomogeneousError, SingularMatrixError
from src.jets import Exponent, Jet, linear_substitution
from src.linalg import Matrix, determinant, matmul, matsub, nullspace
from src.logging_config import get_structured_logger

logger = get_structured_logger(__name__)

LieElement = Tuple[Matrix, Tuple[Scalar, ...]]


@dataclass(frozen=True)
class RigidityReport:
    lie_basis: Tuple[LieElement, ...]
    degrees: Tuple[int, ...]
    contains_identity: bool
    bracket_closed: bool
    permutations: Tuple[Tuple[int, ...], ...]
    permutation_search_complete: bool

    @property
    def dimension(self) -> int:
        return len(self.lie_basis)

    @property
    def rigid_infinitesimal(self) -> bool:
        return self.dimension == 1

    @property
    def rigid_assumed(self) -> bool:
        """Infinitesimally rigid and no non-scalar permutation isotropy within the search bound."""
        return self.rigid_infinitesimal and self.permutation_search_complete and not self.permutations


def _validate(h: Sequence[Jet]) -> Tuple[Field, int, Tuple[int, ...]]:
    if not h:
        raise NonHomogeneousError("isotropy of an empty tuple")
    field, n = h[0].field, h[0].n_vars
    degrees = []
    for poly in h:
        if poly.field != field or poly.n_vars != n:
            raise AmbientMismatchError("polynomials live in different ambients")
        if poly.is_zero():
            raise NonHomogeneousError("zero polynomial in the tuple")
        if not poly.is_homogeneous():
            raise NonHomogeneousError(f"{poly.to_dsl()} is not homogeneous")
        degrees.append(poly.valuation())
    return field, n, tuple(degrees)  # type: ignore[arg-type]


def _shift_terms(poly: Jet, i: int, k: int) -> Dict[Exponent, Scalar]:
    """Coefficients of z_k * dh/dz_i."""
    out: Dict[Exponent, Scalar] = {}
    for exp, c in poly.terms():
        e = exp[i]
        if not e:
            continue
        new = list(exp)
        new[i] -= 1
        new[k] += 1
        key = tuple(new)
        value = c * e
        out[key] = out[key] + value if key in out else value
    return out


def _linear_action(poly: Jet, a: Matrix) -> Dict[Exponent, Scalar]:
    """X_A(h) = sum_i (A z)_i dh/dz_i."""
    out: Dict[Exponent, Scalar] = {}
    n = poly.n_vars
    for i in range(n):
        for k in range(n):
            if a[i][k].is_zero():
                continue
            for exp, c in _shift_terms(poly, i, k).items():
                value = c * a[i][k]
                out[exp] = out[exp] + value if exp in out else value
    return {e: c for e, c in out.items() if not c.is_zero()}


def isotropy_lie_algebra(h: Sequence[Jet]) -> RigidityReport:
    """Basis of {(A, c) : X_A(h_j) = c_j h_j} plus the rigidity decision."""
    field, n, degrees = _validate(h)
    ell = len(h)
    ncols = n * n + ell
    rows: List[List[Scalar]] = []
    for j, poly in enumerate(h):
        monomials = set(e for e, _ in poly.terms())
        shifted = {}
        for i in range(n):
            for k in range(n):
                terms = _shift_terms(poly, i, k)
                shifted[(i, k)] = terms
                monomials.update(terms)
        for mono in sorted(monomials, reverse=True):
            row = [field.zero()] * ncols
            for (i, k), terms in shifted.items():
                if mono in terms:
                    row[i * n + k] = terms[mono]
            row[n * n + j] = -poly.coefficient(mono)
            rows.append(row)
    basis = nullspace(rows, ncols, field)
    lie_basis = tuple(
        ([v[i * n:(i + 1) * n] for i in range(n)], tuple(v[n * n:])) for v in basis
    )
    contains_identity = _spans_identity(lie_basis, degrees, field, n)
    closed = bracket_closure(h, lie_basis)
    perms, complete = permutation_search(h)
    report = RigidityReport(lie_basis, degrees, contains_identity, closed, perms, complete)
    logger.info(
        "rigidity.lie_algebra",
        dimension=report.dimension,
        rigid_infinitesimal=report.rigid_infinitesimal,
        permutations=len(perms),
    )
    return report


def _spans_identity(basis: Sequence[LieElement], degrees: Sequence[int], field: Field, n: int) -> bool:
    """Whether (I, deg h_1, ..., deg h_l) lies in the span of the basis."""
    target = [field.one() if i == k else field.zero() for i in range(n) for k in range(n)]
    target += [field.from_rational(d) for d in degrees]
    vectors = [[x for row in a for x in row] + list(c) for a, c in basis]
    if not vectors:
        return False
    # solve sum_b x_b v_b = target
    size = len(target)
    rows = [[v[r] for v in vectors] + [-target[r]] for r in range(size)]
    kernel = nullspace(rows, len(vectors) + 1, field)
    tol = 0.0 if field.is_exact else get_config().float_tolerance
    return any(not k[-1].is_negligible(tol) for k in kernel)


def bracket_closure(h: Sequence[Jet], basis: Sequence[LieElement]) -> bool:
    """Whether X_[A,B](h_j) = 0 for every pair of basis elements."""
    tol = 0.0 if h[0].field.is_exact else get_config().float_tolerance
    for idx, (a, _) in enumerate(basis):
        for b, _ in basis[idx + 1:]:
            c = matsub(matmul(a, b), matmul(b, a))
            for poly in h:
                if any(not v.is_negligible(tol) for v in _linear_action(poly, c).values()):
                    return False
    return True


def isotropy_membership(h: Sequence[Jet], t: Matrix) -> Optional[Tuple[Scalar, ...]]:
    """The scalars alpha_j with h_j o T = alpha_j h_j, or None when some h_j is not preserved."""
    field, n, _ = _validate(h)
    if len(t) != n or any(len(row) != n for row in t):
        raise AmbientMismatchError(f"matrix is not {n}x{n}")
    tol = 0.0 if field.is_exact else get_config().float_tolerance
    if determinant(t).is_negligible(tol):
        raise SingularMatrixError("T is singular")
    alphas = []
    for poly in h:
        image = linear_substitution(poly, t)
        exp, lead = next(poly.terms())
        alpha = image.coefficient(exp) / lead
        if not (image - poly.scale(alpha)).is_zero():
            return None
        alphas.append(alpha)
    return tuple(alphas)


def permutation_matrix(field: Field, perm: Sequence[int]) -> Matrix:
    """Matrix of z -> (z_perm(0), ..., z_perm(n-1))."""
    n = len(perm)
    return [[field.one() if perm[i] == k else field.zero() for k in range(n)] for i in range(n)]


def permutation_search(h: Sequence[Jet]) -> Tuple[Tuple[Tuple[int, ...], ...], bool]:
    """Non-identity coordinate permutations in I(H); the flag is False when n! exceeds the search bound."""
    field, n, _ = _validate(h)
    bound = get_config().permutation_search_bound
    if factorial(n) > bound:
        logger.warning("rigidity.permutation_search_skipped", n=n, bound=bound)
        return (), False
    found = []
    for perm in permutations(range(n)):
        if list(perm) == list(range(n)):
            continue
        if isotropy_membership(h, permutation_matrix(field, perm)) is not None:
            found.append(tuple(perm))
    return tuple(found), True

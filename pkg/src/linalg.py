"""
Dense linear algebra over coefficient fields.

Exact fields use fraction-free (Bareiss) elimination; the f64 field uses numpy.
Eigenvalues of small matrices are found inside the coefficient field by
factoring the norm of the characteristic polynomial over Q and taking gcds
over the field.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from src.coeff import ComplexF64, CyclotomicField, Field, GaussianField, Scalar
from src.config import get_config
from src.errors import EigenvalueFieldError, SingularMatrixError
from src.logging_config import get_structured_logger

logger = get_structured_logger(__name__)

Matrix = List[List[Scalar]]
Poly = List[Scalar]  # coefficients low to high


# ============================================================================
# Basic matrix helpers
# ============================================================================

def to_matrix(field: Field, rows: Sequence[Sequence[object]]) -> Matrix:
    return [[field.coerce(v) for v in row] for row in rows]


def identity(field: Field, n: int) -> Matrix:
    return [[field.one() if i == j else field.zero() for j in range(n)] for i in range(n)]


def scalar_matrix(field: Field, n: int, c: object) -> Matrix:
    c = field.coerce(c)
    return [[c if i == j else field.zero() for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    field = a[0][0].field
    cols = len(b[0])
    out = []
    for row in a:
        new_row = []
        for j in range(cols):
            acc = field.zero()
            for k, v in enumerate(row):
                if not v.is_zero() and not b[k][j].is_zero():
                    acc = acc + v * b[k][j]
            new_row.append(acc)
        out.append(new_row)
    return out


def matsub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matpow(a: Matrix, k: int) -> Matrix:
    result = identity(a[0][0].field, len(a))
    base = a
    while k:
        if k & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        k >>= 1
    return result


def is_zero_matrix(a: Matrix, tol: float = 0.0) -> bool:
    return all(v.is_negligible(tol) for row in a for v in row)


def matrices_equal(a: Matrix, b: Matrix, tol: float = 0.0) -> bool:
    return is_zero_matrix(matsub(a, b), tol)


def is_diagonal(a: Matrix) -> bool:
    return all(v.is_zero() for i, row in enumerate(a) for j, v in enumerate(row) if i != j)


def is_upper_triangular(a: Matrix) -> bool:
    return all(v.is_zero() for i, row in enumerate(a) for j, v in enumerate(row) if j < i)


def is_lower_triangular(a: Matrix) -> bool:
    return all(v.is_zero() for i, row in enumerate(a) for j, v in enumerate(row) if j > i)


def scalar_value(a: Matrix) -> Optional[Scalar]:
    """c when a = c * I, else None."""
    if not is_diagonal(a):
        return None
    c = a[0][0]
    return c if all((row[i] - c).is_zero() for i, row in enumerate(a)) else None


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


# ============================================================================
# Elimination
# ============================================================================

def _as_numpy(a: Matrix) -> np.ndarray:
    return np.array([[v.to_complex() for v in row] for row in a], dtype=complex)


def bareiss_echelon(rows: Matrix, ncols: int) -> Tuple[Matrix, List[int]]:
    """Row echelon form by fraction-free elimination; returns (rows, pivot columns)."""
    m = [list(r) for r in rows]
    if not m or ncols == 0:
        return [], []
    field = m[0][0].field
    prev = field.one()
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(m)) if not m[i][c].is_zero()), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        p = m[r][c]
        for i in range(r + 1, len(m)):
            factor = m[i][c]
            if factor.is_zero():
                continue
            ri, rr = m[i], m[r]
            m[i] = [
                ((p * ri[j] - factor * rr[j]) / prev) if j > c else field.zero()
                for j in range(ncols)
            ]
        prev = p
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Matrix, ncols: int, field: Field) -> List[List[Scalar]]:
    """Basis of {v : rows v = 0}; one vector per free column, free columns ascending."""
    if not field.is_exact:
        return _float_nullspace(rows, ncols)
    echelon, pivots = bareiss_echelon(rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [field.zero()] * ncols
        v[f] = field.one()
        for k in range(len(pivots) - 1, -1, -1):
            pc, row = pivots[k], echelon[k]
            acc = field.zero()
            for j in range(pc + 1, ncols):
                if not row[j].is_zero() and not v[j].is_zero():
                    acc = acc + row[j] * v[j]
            v[pc] = -acc / row[pc]
        basis.append(v)
    return basis


def _float_nullspace(rows: Matrix, ncols: int) -> List[List[Scalar]]:
    tol = get_config().float_tolerance
    if not rows:
        return [[ComplexF64(1.0 if i == j else 0.0) for i in range(ncols)] for j in range(ncols)]
    a = _as_numpy(rows)
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    return [[ComplexF64(complex(x)) for x in vh[k].conj()] for k in range(rank, ncols)]


def rank(rows: Matrix, ncols: int, field: Field) -> int:
    if not field.is_exact:
        return ncols - len(_float_nullspace(rows, ncols))
    return len(bareiss_echelon(rows, ncols)[1])


def solve(rows: Matrix, rhs: Sequence[Scalar], field: Field) -> Optional[List[Scalar]]:
    """Some solution of rows x = rhs (free variables zero), or None when inconsistent."""
    ncols = len(rows[0]) if rows else 0
    if not field.is_exact:
        a = _as_numpy(rows)
        b = np.array([v.to_complex() for v in rhs], dtype=complex)
        x, *_ = np.linalg.lstsq(a, b, rcond=None)
        if np.max(np.abs(a @ x - b), initial=0.0) > get_config().float_tolerance * 10:
            return None
        return [ComplexF64(complex(v)) for v in x]
    augmented = [list(r) + [b] for r, b in zip(rows, rhs)]
    echelon, pivots = bareiss_echelon(augmented, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [field.zero()] * ncols
    for k in range(len(pivots) - 1, -1, -1):
        pc, row = pivots[k], echelon[k]
        acc = row[ncols]
        for j in range(pc + 1, ncols):
            if not row[j].is_zero() and not x[j].is_zero():
                acc = acc - row[j] * x[j]
        x[pc] = acc / row[pc]
    return x


def reduced_echelon(rows: Matrix, ncols: int) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form with unit pivots."""
    echelon, pivots = bareiss_echelon(rows, ncols)
    reduced = [list(r) for r in echelon]
    for k in range(len(pivots) - 1, -1, -1):
        pc = pivots[k]
        lead = reduced[k][pc].inverse()
        reduced[k] = [v * lead for v in reduced[k]]
        for i in range(k):
            f = reduced[i][pc]
            if not f.is_zero():
                reduced[i] = [a - f * b for a, b in zip(reduced[i], reduced[k])]
    return reduced, pivots


def canonical_nullspace_vector(basis: List[List[Scalar]]) -> Optional[List[Scalar]]:
    """First row of the reduced echelon form of a spanning set: a canonical member of the span."""
    if not basis:
        return None
    reduced, pivots = reduced_echelon(basis, len(basis[0]))
    return reduced[0] if pivots else None


def determinant(a: Matrix) -> Scalar:
    field = a[0][0].field
    if not field.is_exact:
        return ComplexF64(complex(np.linalg.det(_as_numpy(a))))
    n = len(a)
    m = [list(r) for r in a]
    sign, prev = 1, field.one()
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not m[i][k].is_zero()), None)
            if swap is None:
                return field.zero()
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[k][k] * m[i][j] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    return m[n - 1][n - 1] * sign


def inverse(a: Matrix) -> Matrix:
    field = a[0][0].field
    n = len(a)
    if not field.is_exact:
        arr = _as_numpy(a)
        if abs(np.linalg.det(arr)) < get_config().float_tolerance:
            raise SingularMatrixError("matrix is numerically singular")
        inv = np.linalg.inv(arr)
        return [[ComplexF64(complex(v)) for v in row] for row in inv]
    aug = [list(row) + [field.one() if i == j else field.zero() for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((i for i in range(c, n) if not aug[i][c].is_zero()), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv_p = aug[c][c].inverse()
        aug[c] = [v * inv_p for v in aug[c]]
        for i in range(n):
            if i != c and not aug[i][c].is_zero():
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


# ============================================================================
# Polynomials over a field
# ============================================================================

def poly_trim(p: Poly) -> Poly:
    out = list(p)
    while out and out[-1].is_zero():
        out.pop()
    return out


def poly_divmod(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    a, b = poly_trim(a), poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    field = b[-1].field
    quot = [field.zero()] * max(len(a) - len(b) + 1, 1)
    rem = list(a)
    lead_inv = b[-1].inverse()
    while len(poly_trim(rem)) >= len(b):
        rem = poly_trim(rem)
        shift = len(rem) - len(b)
        c = rem[-1] * lead_inv
        quot[shift] = c
        for i, bc in enumerate(b):
            rem[shift + i] = rem[shift + i] - c * bc
        rem = poly_trim(rem)
    return poly_trim(quot), rem


def poly_gcd(a: Poly, b: Poly) -> Poly:
    a, b = poly_trim(a), poly_trim(b)
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    if not a:
        return a
    lead = a[-1].inverse()
    return [c * lead for c in a]


def poly_derivative(p: Poly) -> Poly:
    return [c * k for k, c in enumerate(p)][1:]


def poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return []
    field = a[0].field
    out = [field.zero()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def characteristic_polynomial(a: Matrix) -> Poly:
    """det(x I - a) by the Faddeev-LeVerrier recursion, monic, low to high."""
    field = a[0][0].field
    n = len(a)
    coeffs = [field.zero()] * (n + 1)
    coeffs[n] = field.one()
    m = [[field.zero()] * n for _ in range(n)]
    ident = identity(field, n)
    for k in range(1, n + 1):
        m = [[m_ij + coeffs[n - k + 1] * id_ij for m_ij, id_ij in zip(mr, ir)] for mr, ir in zip(m, ident)]
        am = matmul(a, m)
        trace = field.zero()
        for i in range(n):
            trace = trace + am[i][i]
        coeffs[n - k] = -trace / k
        m = am
    return coeffs


# ============================================================================
# Eigenvalues inside the field
# ============================================================================

def _generator(field: Field) -> Tuple[Scalar, List[int]]:
    """Primitive element and the integer coefficients (low to high) of its minimal polynomial."""
    if isinstance(field, GaussianField):
        return field.i(), [1, 0, 1]
    if isinstance(field, CyclotomicField):
        return field.zeta(1), list(field.modulus)
    raise EigenvalueFieldError(f"no primitive element for {field.spec()}")


def _coordinates(s: Scalar) -> List[Fraction]:
    if isinstance(s.field, GaussianField):
        return [s.re, s.im]  # type: ignore[attr-defined]
    return list(s.coeffs)  # type: ignore[attr-defined]


def _poly_to_sympy(p: Poly, x: sympy.Symbol, t: sympy.Symbol) -> sympy.Expr:
    expr = sympy.Integer(0)
    for k, c in enumerate(p):
        coeff = sum(
            (sympy.Rational(q.numerator, q.denominator) * t**j for j, q in enumerate(_coordinates(c)) if q),
            sympy.Integer(0),
        )
        expr += coeff * x**k
    return expr


def _rational_poly_at_shift(g: List[Fraction], shift: Scalar) -> Poly:
    """g(x + shift) as a polynomial over the field of `shift`."""
    field = shift.field
    result: Poly = [field.zero()]
    for c in reversed(g):
        result = poly_mul(result, [shift, field.one()])
        result[0] = result[0] + c
    return poly_trim(result)


def _irreducible_factors_over_field(p: Poly) -> List[Poly]:
    """Monic irreducible factors (without multiplicity) of a squarefree polynomial."""
    field = p[-1].field
    x, t = sympy.symbols("x t")
    gen, minpoly = _generator(field)
    min_expr = sum((c * t**k for k, c in enumerate(minpoly)), sympy.Integer(0))
    if len(minpoly) == 2:
        # the field is Q
        coeffs = [c.rational_value() for c in p]
        expr = sum((sympy.Rational(q.numerator, q.denominator) * x**k for k, q in enumerate(coeffs)), sympy.Integer(0))
        factors = []
        for g, _ in sympy.factor_list(expr, x)[1]:
            gc = [Fraction(int(c.p), int(c.q)) for c in reversed(sympy.Poly(g, x).all_coeffs())]
            factors.append(poly_gcd(p, [field.coerce(c) for c in gc]))
        return factors
    for s in range(0, 25):
        shifted = _poly_to_sympy(p, x, t).subs(x, x - s * t)
        norm = sympy.Poly(sympy.resultant(min_expr, sympy.expand(shifted), t), x, domain="QQ")
        if norm.gcd(norm.diff(x)).degree() > 0:
            continue
        factors = []
        for g, _ in norm.factor_list()[1]:
            gc = [Fraction(int(c.p), int(c.q)) for c in reversed(g.all_coeffs())]
            h = poly_gcd(p, _rational_poly_at_shift(gc, gen * s))
            if len(h) > 1:
                factors.append(h)
        return factors
    raise EigenvalueFieldError("could not find a separating shift for the norm polynomial")


def roots_in_field(p: Poly) -> Dict[Scalar, int]:
    """Roots of p lying in its coefficient field, with multiplicities."""
    p = poly_trim(p)
    field = p[-1].field
    if not field.is_exact:
        values = np.roots([c.to_complex() for c in reversed(p)])
        out: Dict[Scalar, int] = {}
        for v in values:
            key = ComplexF64(complex(v))
            out[key] = out.get(key, 0) + 1
        return out
    g = poly_gcd(p, poly_derivative(p))
    squarefree = poly_divmod(p, g)[0] if len(g) > 1 else p
    roots: Dict[Scalar, int] = {}
    for factor in _irreducible_factors_over_field(squarefree):
        if len(factor) != 2:
            continue
        root = -factor[0] / factor[1]
        mult, rest = 0, p
        while True:
            q, r = poly_divmod(rest, [-root, field.one()])
            if r:
                break
            mult, rest = mult + 1, q
        roots[root] = mult
    return roots


def eigenvalues_in_field(a: Matrix) -> Dict[Scalar, int]:
    """Eigenvalues with algebraic multiplicities; raises when some lie outside the field."""
    n = len(a)
    if is_upper_triangular(a) or is_lower_triangular(a):
        out: Dict[Scalar, int] = {}
        for i in range(n):
            out[a[i][i]] = out.get(a[i][i], 0) + 1
        return out
    roots = roots_in_field(characteristic_polynomial(a))
    found = sum(roots.values())
    if found != n:
        field = a[0][0].field
        raise EigenvalueFieldError(
            f"only {found} of {n} eigenvalues lie in {field.spec()}; use a larger cyclotomic field"
        )
    logger.debug("linalg.eigenvalues", count=len(roots))
    return roots


def generalized_eigenbasis(a: Matrix) -> Tuple[Matrix, List[Scalar]]:
    """Columns P spanning the generalized eigenspaces, and the eigenvalue attached to each column.

    In the basis P the matrix is block diagonal, one block mu*I + nilpotent per eigenvalue.
    """
    field = a[0][0].field
    n = len(a)
    eigs = eigenvalues_in_field(a)
    columns: List[List[Scalar]] = []
    labels: List[Scalar] = []
    for mu, mult in eigs.items():
        shifted = matpow(matsub(a, scalar_matrix(field, n, mu)), mult)
        basis = nullspace(shifted, n, field)
        columns.extend(basis)
        labels.extend([mu] * len(basis))
    if len(columns) != n:
        raise EigenvalueFieldError("generalized eigenspaces do not span; matrix is not triangularizable here")
    return transpose(columns), labels

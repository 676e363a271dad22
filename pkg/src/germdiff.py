"""
Structure theory of diffeomorphism jets.

Formal flows of vector fields, logarithms of unipotent jets, the
multiplicative Jordan decomposition phi = phi_S o phi_U, Poincare
linearization and the twisted functional equation v o S = w v.

All normal-form computations share one graded engine (`poincare_dulac_normalize`):
the linear part is put in a generalized eigenbasis, and at every degree the
terms that do not commute with the semisimple part are removed by solving the
homological equation on each eigenvalue class.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import factorial
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

from src.calculus import DiffeoJet, VectorField
from src.coeff import RationalLike, Scalar, root_of_unity_order
from src.config import get_config
from src.errors import (
    GermCalcError,
    JetError,
    NonNilpotentFlowError,
    NotUnipotentError,
    ResonanceError,
    TwistedEquationError,
)
from src.jets import Ambient, Exponent, Jet, default_names, grlex_key, jet_exp, jet_log
from src.linalg import (
    Matrix,
    generalized_eigenbasis,
    inverse,
    is_zero_matrix,
    matpow,
    scalar_value,
)
from src.logging_config import get_structured_logger

logger = get_structured_logger(__name__)

TValue = Union[Scalar, RationalLike]


# ============================================================================
# Flows
# ============================================================================

@dataclass(frozen=True)
class PolyFlow:
    """exp(tX)(z) = sum_sigma P_sigma(t) z^sigma, one coefficient table per component."""

    ambient: Ambient
    polys: Tuple[Dict[Exponent, Tuple[Scalar, ...]], ...]

    def t_degree(self) -> int:
        return max((len(p) - 1 for comp in self.polys for p in comp.values()), default=0)

    def t_degree_bound(self) -> int:
        return t_degree_bound(self.ambient.n_vars, self.ambient.order)

    def _evaluate_polys(self, t: Scalar, derivative: bool = False) -> List[Jet]:
        field = self.ambient.field
        out = []
        for comp in self.polys:
            terms = {}
            for exp, coeffs in comp.items():
                acc, power = field.zero(), field.one()
                if derivative:
                    for k in range(1, len(coeffs)):
                        acc = acc + coeffs[k] * power * k
                        power = power * t
                else:
                    for c in coeffs:
                        acc = acc + c * power
                        power = power * t
                terms[exp] = acc
            out.append(self.ambient.jet(terms))
        return out

    def evaluate(self, t: TValue) -> DiffeoJet:
        return DiffeoJet(self._evaluate_polys(self.ambient.scalar(t)))

    def velocity(self, t: TValue) -> List[Jet]:
        """d/dt exp(tX) at the given t."""
        return self._evaluate_polys(self.ambient.scalar(t), derivative=True)

    def to_dsl(self) -> str:
        names = default_names(self.ambient.n_vars)
        rows = []
        for comp in self.polys:
            ordered = sorted(comp.items(), key=lambda item: grlex_key(item[0]))
            rows.append(" + ".join(f"({_poly_text(c)})*{_monomial_text(e, names)}" for e, c in ordered) or "0")
        return "[" + ", ".join(rows) + "]"


def t_degree_bound(n_vars: int, order: int) -> int:
    """Upper bound on deg_t P_sigma for a field with nilpotent linear part."""
    return (n_vars - 1) * order * (order + 1) // 2 + order - 1


def _poly_text(coeffs: Sequence[Scalar]) -> str:
    parts = []
    for k, c in enumerate(coeffs):
        if c.is_zero():
            continue
        parts.append(c.to_dsl() if k == 0 else f"{c.to_dsl()}*t^{k}")
    return " + ".join(parts) or "0"


def _monomial_text(exp: Exponent, names: Sequence[str]) -> str:
    return "*".join(names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exp) if e) or "1"


def _lie_series_terms(x: VectorField, bound: int) -> List[List[Jet]]:
    """X^k(z_i) for k = 0.. until every component vanishes; raises past `bound`."""
    ambient = x.ambient
    current = ambient.variables()
    terms = [current]
    for k in range(1, bound + 2):
        current = [x.apply(c) for c in current]
        if all(c.is_zero() for c in current):
            return terms
        terms.append(current)
    raise NonNilpotentFlowError("Lie series did not terminate; the linear part is not nilpotent")


def formal_flow(x: VectorField, order: Optional[int] = None) -> PolyFlow:
    """exp(tX) as a polynomial in t, for X(0) = 0 with nilpotent linear part."""
    if order is not None:
        x = x.truncate(order)
    if not x.vanishes_at_origin():
        raise JetError("formal_flow needs X(0) = 0")
    n = x.n_vars
    tol = 0.0 if x.field.is_exact else get_config().float_tolerance
    if not is_zero_matrix(matpow(x.linear_part(), n), tol):
        raise NonNilpotentFlowError(
            "the linear part of X is not nilpotent; evaluate the flow at explicit t with flow_at"
        )
    ambient = x.ambient
    series = _lie_series_terms(x, t_degree_bound(n, ambient.order))
    polys: List[Dict[Exponent, List[Scalar]]] = [{} for _ in range(n)]
    for k, level in enumerate(series):
        inv_fact = Fraction(1, factorial(k))
        for i, jet in enumerate(level):
            for exp, c in jet.terms():
                coeffs = polys[i].setdefault(exp, [])
                coeffs.extend([ambient.field.zero()] * (k + 1 - len(coeffs)))
                coeffs[k] = c * inv_fact
    logger.debug("germdiff.formal_flow", t_degree=len(series) - 1, order=ambient.order)
    return PolyFlow(ambient, tuple({e: tuple(c) for e, c in comp.items()} for comp in polys))


def flow_at(x: VectorField, t: TValue, max_terms: int = 400) -> DiffeoJet:
    """exp(tX) at one value of t.

    Nilpotent linear parts use the exact polynomial flow; other linear parts are
    summed as a Lie series to float tolerance (f64 only).
    """
    if not x.vanishes_at_origin():
        raise JetError("flow_at needs X(0) = 0")
    n = x.n_vars
    tol = 0.0 if x.field.is_exact else get_config().float_tolerance
    if is_zero_matrix(matpow(x.linear_part(), n), tol):
        return formal_flow(x).evaluate(t)
    if x.field.is_exact:
        raise NonNilpotentFlowError("exact flows exist only for nilpotent linear parts")
    ambient = x.ambient
    t_value = ambient.scalar(t)
    current = ambient.variables()
    total = list(current)
    coeff = ambient.field.one()
    for k in range(1, max_terms + 1):
        current = [x.apply(c) for c in current]
        coeff = coeff * t_value / k
        increment = [c.scale(coeff) for c in current]
        total = [a + b for a, b in zip(total, increment)]
        if all(inc.is_zero(tol * 1e-3) for inc in increment):
            return DiffeoJet(total)
    raise NonNilpotentFlowError(f"Lie series did not converge in {max_terms} terms")


def diffeo_log(phi: DiffeoJet) -> VectorField:
    """The nilpotent field X with exp(X) = phi, for unipotent phi."""
    if not phi.is_unipotent():
        raise NotUnipotentError("diffeo_log needs a unipotent linear part")
    ambient = phi.ambient
    bound = t_degree_bound(ambient.n_vars, ambient.order) + 1
    comps = []
    for z in ambient.variables():
        total = ambient.zero()
        g = z
        for k in range(1, bound + 2):
            g = phi.pull(g) - g
            if g.is_zero():
                break
            total = total + g.scale(Fraction(1 if k % 2 else -1, k))
        else:
            raise NotUnipotentError("difference operator of phi is not nilpotent to this order")
        comps.append(total)
    return VectorField(comps)


# ============================================================================
# Normal forms
# ============================================================================

@dataclass(frozen=True)
class ResonantTerm:
    degree: int
    component: int
    exponent: Exponent
    coefficient: Scalar


@dataclass(frozen=True)
class NormalizationResult:
    """phi = G o normal_form o G^-1, with normal_form commuting with diag(eigenvalues)."""

    conjugator: DiffeoJet
    normal_form: DiffeoJet
    eigenvalues: Tuple[Scalar, ...]
    resonant_terms: Tuple[ResonantTerm, ...]
    basis: Matrix = dc_field(repr=False)


def _mu_key(mu: Scalar) -> Hashable:
    if mu.field.is_exact:
        return mu
    value = mu.to_complex()
    return complex(round(value.real, 8), round(value.imag, 8))


def _is_resonant(mu: Scalar) -> bool:
    tol = 0.0 if mu.field.is_exact else get_config().float_tolerance
    return mu.is_negligible(tol)


def _apply_matrix(matrix: Matrix, vec: Sequence[Jet], like: Jet) -> List[Jet]:
    out = []
    for row in matrix:
        acc = like.like()
        for a, v in zip(row, vec):
            if not a.is_zero() and not v.is_zero():
                acc = acc + v.scale(a)
        out.append(acc)
    return out


def _homological(linear: DiffeoJet, h: List[Jet]) -> List[Jet]:
    """A(h) = L h - h o L for a homogeneous vector polynomial h."""
    lh = _apply_matrix(linear.linear_part(), h, h[0])
    hl = [linear.pull(c) for c in h]
    return [a - b for a, b in zip(lh, hl)]


def _split_by_mu(
    vec: Sequence[Jet], degree: int, labels: Sequence[Scalar]
) -> Dict[Hashable, Tuple[Scalar, List[Dict[Exponent, Scalar]]]]:
    groups: Dict[Hashable, Tuple[Scalar, List[Dict[Exponent, Scalar]]]] = {}
    n = len(vec)
    for i, jet in enumerate(vec):
        for exp, c in jet.bucket(degree).items():
            weight = labels[0].field.one()
            for lam, e in zip(labels, exp):
                if e:
                    weight = weight * lam**e
            mu = labels[i] - weight
            key = _mu_key(mu)
            if key not in groups:
                groups[key] = (mu, [{} for _ in range(n)])
            groups[key][1][i][exp] = c
    return groups


def poincare_dulac_normalize(phi: DiffeoJet) -> NormalizationResult:
    """Conjugate phi so that every nonlinear term commutes with the semisimple part of its linear part."""
    ambient = phi.ambient
    n, order = ambient.n_vars, ambient.order
    basis, labels = generalized_eigenbasis(phi.linear_part())
    p_map = DiffeoJet.linear(ambient, basis)
    p_inv = DiffeoJet.linear(ambient, inverse(basis))
    psi = p_inv.compose(phi).compose(p_map)
    linear = DiffeoJet.linear(ambient, psi.linear_part())
    conj = DiffeoJet.identity(ambient)
    resonant: List[ResonantTerm] = []
    max_iter = n * (order + 1) ** n + 2
    for degree in range(2, order + 1):
        current = [c.homogeneous_part(degree) for c in psi.components]
        groups = _split_by_mu(current, degree, labels)
        h_total = [ambient.zero() for _ in range(n)]
        for mu, parts in groups.values():
            if _is_resonant(mu):
                continue
            g = [ambient.jet(p) for p in parts]
            # h = -A^-1 g with A = mu (1 + M/mu), M nilpotent on this class
            term = [c.scale(mu.inverse()) for c in g]
            h = [ambient.zero() for _ in range(n)]
            for _ in range(max_iter):
                if all(t.is_zero() for t in term):
                    break
                h = [a - t for a, t in zip(h, term)]
                applied = _homological(linear, term)
                m_term = [a - t.scale(mu) for a, t in zip(applied, term)]
                term = [c.scale(-mu.inverse()) for c in m_term]
            else:
                raise ResonanceError(f"homological equation did not converge at degree {degree}")
            h_total = [a + b for a, b in zip(h_total, h)]
        if any(not c.is_zero() for c in h_total):
            step = DiffeoJet([z + hc for z, hc in zip(ambient.variables(), h_total)])
            psi = step.inverse().compose(psi).compose(step)
            conj = conj.compose(step)
        for mu, parts in _split_by_mu(
            [c.homogeneous_part(degree) for c in psi.components], degree, labels
        ).values():
            if _is_resonant(mu):
                for i, part in enumerate(parts):
                    for exp, c in part.items():
                        resonant.append(ResonantTerm(degree, i, exp, c))
        logger.debug("germdiff.normalize.degree", degree=degree, classes=len(groups))
    return NormalizationResult(
        conjugator=p_map.compose(conj),
        normal_form=psi,
        eigenvalues=tuple(labels),
        resonant_terms=tuple(resonant),
        basis=basis,
    )


@dataclass(frozen=True)
class JordanDecomposition:
    semisimple: DiffeoJet
    unipotent: DiffeoJet
    conjugator: DiffeoJet
    eigenvalues: Tuple[Scalar, ...]
    resonant_terms: Tuple[ResonantTerm, ...]

    @property
    def linearizing_witness(self) -> DiffeoJet:
        """G with G^-1 o phi_S o G diagonal."""
        return self.conjugator


def jordan_decompose(phi: DiffeoJet) -> JordanDecomposition:
    """phi = phi_S o phi_U with phi_S formally linearizable, phi_U unipotent, commuting."""
    normal = poincare_dulac_normalize(phi)
    ambient = phi.ambient
    n = ambient.n_vars
    diag = [[normal.eigenvalues[i] if i == j else ambient.field.zero() for j in range(n)] for i in range(n)]
    d_map = DiffeoJet.linear(ambient, diag)
    d_inv = DiffeoJet.linear(ambient, inverse(diag))
    g = normal.conjugator
    g_inv = g.inverse()
    semisimple = g.compose(d_map).compose(g_inv)
    unipotent = g.compose(d_inv.compose(normal.normal_form)).compose(g_inv)
    logger.info("germdiff.jordan", resonant_terms=len(normal.resonant_terms), order=ambient.order)
    return JordanDecomposition(semisimple, unipotent, g, normal.eigenvalues, normal.resonant_terms)


def poincare_linearize(phi: DiffeoJet) -> DiffeoJet:
    """The unique g with Dg(0) = I and g^-1 o phi o g = rho I."""
    rho = scalar_value(phi.linear_part())
    if rho is None:
        raise GermCalcError("poincare_linearize needs a linear part rho * I")
    if phi.field.is_exact:
        if root_of_unity_order(rho) is not None:
            raise ResonanceError(f"rho = {rho.to_text()} is a root of unity")
    else:
        tol = get_config().float_tolerance
        for k in range(2, phi.order + 1):
            if (rho**k - rho).is_negligible(tol):
                raise ResonanceError(f"rho^{k} = rho within tolerance")
    normal = poincare_dulac_normalize(phi)
    if normal.resonant_terms:
        raise ResonanceError("resonant terms survived normalization")
    # P o H o P^-1 has linear part I
    basis_inv = DiffeoJet.linear(phi.ambient, inverse(normal.basis))
    return normal.conjugator.compose(basis_inv)


# ============================================================================
# Twisted functional equation
# ============================================================================

def solve_twisted_equation(s: DiffeoJet, w: Jet) -> Jet:
    """v with v o S = w v and v(0) = 1, for S = lambda I of finite order r."""
    lam = scalar_value(s.linear_part())
    if lam is None or any(not c.is_zero() for c in s.nonlinear_part()):
        raise TwistedEquationError("S must be the linear map lambda * I")
    r = root_of_unity_order(lam)
    if r is None:
        raise TwistedEquationError(f"lambda = {lam.to_text()} is not a root of unity")
    w0 = w.constant_term()
    if not (w0**r).is_one():
        raise TwistedEquationError(f"w(0)^{r} != 1")
    if not w0.is_one():
        raise TwistedEquationError("w(0) must be 1 for a solution with v(0) = 1")
    order = min(s.order, w.order)
    w = w.truncate(order)
    s = s.truncate(order)
    iterates = [DiffeoJet.identity(s.ambient)]
    for _ in range(1, r):
        iterates.append(iterates[-1].compose(s))
    product = w.like(order=order) + 1
    for it in iterates:
        product = product * it.pull(w)
    tol = None if w.field.is_exact else get_config().float_tolerance
    if not (product - 1).is_zero(tol):
        raise TwistedEquationError("product of w along the S-orbit is not 1")
    phi_hat = jet_log(w)
    theta = w.like(order=order)
    for j, it in enumerate(iterates):
        if j:
            theta = theta + it.pull(phi_hat).scale(j)
    theta = theta.scale(Fraction(1, r))
    logger.debug("germdiff.twisted", r=r, order=order)
    return jet_exp(theta)


# ============================================================================
# Graded splitting
# ============================================================================

@dataclass(frozen=True)
class GradedSplit:
    parts: Tuple[VectorField, ...]
    nonzero_classes: Tuple[int, ...]
    lowest_degree: Optional[int]
    delta: Optional[Scalar] = None
    eigen_relation: Optional[bool] = None


def graded_split(
    x: VectorField, r: int, n0: Optional[int] = None, lam: Optional[Scalar] = None
) -> GradedSplit:
    """Z_i = sum_m X_{i+1+m r}: components of X graded by degree modulo r.

    With lam given (S = lam I), also tests S^*X = delta X for delta = lam^(n0-1).
    """
    if r < 1:
        raise GermCalcError("graded_split needs r >= 1")
    ambient = x.ambient
    parts = [[ambient.zero() for _ in range(x.n_vars)] for _ in range(r)]
    degrees = set()
    for j, comp in enumerate(x.components):
        for degree in range(comp.order + 1):
            piece = comp.homogeneous_part(degree)
            if piece.is_zero():
                continue
            degrees.add(degree)
            i = (degree - 1) % r
            parts[i][j] = parts[i][j] + piece
    fields = tuple(VectorField(p) for p in parts)
    nonzero = tuple(i for i, f in enumerate(fields) if not f.is_zero())
    lowest = n0 if n0 is not None else (min(degrees) if degrees else None)
    if lam is None or lowest is None:
        return GradedSplit(fields, nonzero, lowest)
    lam = ambient.scalar(lam)
    delta = lam ** (lowest - 1)
    pulled = VectorField([c.scale_by_degree(lam).scale(lam.inverse()) for c in x.components])
    relation = pulled == x.scale(delta)
    return GradedSplit(fields, nonzero, lowest, delta, relation)



def commutes(a: DiffeoJet, b: DiffeoJet) -> bool:
    return a.compose(b).equals(b.compose(a))


def conjugate(g: DiffeoJet, phi: DiffeoJet) -> DiffeoJet:
    """g^-1 o phi o g."""
    return g.inverse().compose(phi).compose(g)

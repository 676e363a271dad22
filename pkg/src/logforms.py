"""
Closed meromorphic 1-forms in logarithmic normal form and the isotropy / fix
decision procedures built on them.

A LogForm encodes sum_j lambda_j df_j/f_j + d(H / prod_j f_j^n_j). Negative
answers (not in Iso, no integrating factor, fix = no) are returned as values;
exceptions signal broken preconditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Tuple

from src.calculus import (
    DiffeoJet,
    PForm,
    VectorField,
    all_indices,
    closedness_residual,
    exterior_d,
    interior_product,
    pullback,
)
from src.coeff import Field, Scalar
from src.config import get_config
from src.errors import (
    BranchMatchError,
    EigenvalueFieldError,
    FormDegreeError,
    GermCalcError,
    JetError,
    NotInIsoError,
    ResidueActionError,
)
from src.germdiff import diffeo_log, jordan_decompose
from src.jets import Ambient, Exponent, Jet, jet_exp, monomials_of_degree, monomials_up_to
from src.linalg import canonical_nullspace_vector, nullspace, scalar_value, solve
from src.logging_config import get_structured_logger

logger = get_structured_logger(__name__)


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class Branch:
    residue: Scalar
    f: Jet
    excess: int = 0


@dataclass(frozen=True)
class LogForm:
    """sum_j lambda_j df_j/f_j + d(H / prod f_j^n_j)."""

    branches: Tuple[Branch, ...]
    numerator: Jet
    check_units: bool = True
    assumptions: Tuple[str, ...] = dc_field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.branches:
            raise BranchMatchError("a logarithmic form needs at least one branch")
        field, n = self.numerator.field, self.numerator.n_vars
        notes = []
        for b in self.branches:
            if b.f.field != field or b.f.n_vars != n or b.residue.field != field:
                raise BranchMatchError("branches and numerator live in different ambients")
            if b.excess < 0:
                raise BranchMatchError("exponent excess n_j must be non-negative")
            if b.f.is_zero():
                raise BranchMatchError("branch is identically zero")
            if self.check_units and not b.f.constant_term().is_zero():
                raise JetError("branches must vanish at the origin")
        for i, a in enumerate(self.branches):
            for b in self.branches[i + 1:]:
                la, lb = a.f.leading_form(), b.f.leading_form()
                if self.check_units and la.valuation() == 1 and lb.valuation() == 1 and _proportional(la, lb):
                    raise BranchMatchError("two branches share their linear part")
        if len(self.branches) > 1:
            notes.append("branches assumed pairwise coprime beyond their lowest jets")
        object.__setattr__(self, "assumptions", tuple(notes))

    @classmethod
    def logarithmic(cls, pairs: Sequence[Tuple[Scalar, Jet]], check_units: bool = True) -> "LogForm":
        first = pairs[0][1]
        return cls(
            tuple(Branch(first.field.coerce(lam), f) for lam, f in pairs),
            Jet.zero(first.field, first.n_vars, first.order),
            check_units,
        )

    @property
    def field(self) -> Field:
        return self.numerator.field

    @property
    def n_vars(self) -> int:
        return self.numerator.n_vars

    @property
    def order(self) -> int:
        return min([self.numerator.order] + [b.f.order for b in self.branches])

    @property
    def ambient(self) -> Ambient:
        return Ambient(self.field, self.n_vars, self.order)

    @property
    def residues(self) -> Tuple[Scalar, ...]:
        return tuple(b.residue for b in self.branches)

    def is_logarithmic(self) -> bool:
        return self.numerator.is_zero() and all(b.excess == 0 for b in self.branches)

    def to_dsl(self) -> str:
        terms = [f"{b.residue.to_dsl()}*dlog({b.f.to_dsl()})" for b in self.branches]
        if not self.numerator.is_zero():
            denom = " * ".join(
                f"({b.f.to_dsl()})^{b.excess}" for b in self.branches if b.excess
            )
            inner = f"({self.numerator.to_dsl()})" + (f" / ({denom})" if denom else "")
            terms.append(f"d({inner})")
        return "logform{ " + " + ".join(terms) + " }"


def _proportional(a: Jet, b: Jet) -> bool:
    lead = next(iter(a.terms()), None)
    if lead is None:
        return False
    exp, ca = lead
    cb = b.coefficient(exp)
    if cb.is_zero():
        return False
    return (a.scale(cb) - b.scale(ca)).is_zero()


@dataclass(frozen=True)
class Membership:
    """Result of the cofactor solve Phi^* Omega = u Omega."""

    status: Literal["yes", "no"]
    cofactor: Optional[Jet] = None
    residual: Optional[PForm] = None
    failed_degree: Optional[int] = None
    order: int = 0

    @property
    def member(self) -> bool:
        return self.status == "yes"


@dataclass(frozen=True)
class FixVerdict:
    status: Literal["yes", "no", "unknown"]
    reason: str
    generator: Optional[VectorField] = None
    factor: Optional[Jet] = None
    closedness: Optional[PForm] = None


@dataclass(frozen=True)
class IsoVerdict:
    member: Membership
    fix: Optional[FixVerdict] = None


# ============================================================================
# Graded division
# ============================================================================

@dataclass(frozen=True)
class Quotient:
    quotient: Optional[Jet]
    failed_degree: Optional[int]
    order: int
    partial: Optional[Jet] = None


def graded_quotient(targets: Sequence[Jet], divisors: Sequence[Jet]) -> Quotient:
    """Solve target_c = q * divisor_c for all components c, degree by degree.

    The divisor family must not vanish identically. q is determined to order E - v,
    where E is the common order and v the lowest degree present in the divisors.
    """
    order = min([t.order for t in targets] + [d.order for d in divisors])
    targets = [t.truncate(order) for t in targets]
    divisors = [d.truncate(order) for d in divisors]
    valuations = [d.valuation() for d in divisors if d.valuation() is not None]
    if not valuations:
        raise GermCalcError("graded_quotient by the zero family")
    v = min(valuations)
    field, n = divisors[0].field, divisors[0].n_vars
    leading = [d.homogeneous_part(v) for d in divisors]
    q_order = order - v
    solved: List[Jet] = []

    def assemble(top: int) -> Jet:
        terms = {}
        for piece in solved:
            for e, c in piece.terms():
                terms[e] = c
        return Jet(field, n, top, terms)

    for k in range(q_order + 1):
        unknowns = monomials_of_degree(n, k)
        rows, rhs = [], []
        for t, d, lead in zip(targets, divisors, leading):
            # slice of degree v + k of target - sum_{j<k} q_j d
            remainder = dict(t.bucket(v + k))
            for j, qj in enumerate(solved):
                for eq, cq in qj.bucket(j).items():
                    for ed, cd in d.bucket(v + k - j).items():
                        e = tuple(a + b for a, b in zip(eq, ed))
                        remainder[e] = remainder.get(e, field.zero()) - cq * cd
            row_index = {e: i for i, e in enumerate(monomials_of_degree(n, v + k))}
            block = [[field.zero()] * len(unknowns) for _ in row_index]
            for col, mono in enumerate(unknowns):
                for el, cl in lead.bucket(v).items():
                    e = tuple(a + b for a, b in zip(mono, el))
                    block[row_index[e]][col] = cl
            rows.extend(block)
            values = [field.zero()] * len(row_index)
            for e, c in remainder.items():
                values[row_index[e]] = c
            rhs.extend(values)
        solution = solve(rows, rhs, field) if unknowns else []
        if solution is None:
            logger.debug("logforms.graded_quotient.inconsistent", degree=v + k)
            return Quotient(None, v + k, order, assemble(q_order))
        solved.append(Jet(field, n, k, dict(zip(unknowns, solution))))
    return Quotient(assemble(q_order), None, q_order)


def _form_components(form: PForm) -> Tuple[List[Tuple[int, ...]], List[Jet]]:
    indices = all_indices(form.n_vars, form.degree)
    return indices, [form.component(i) for i in indices]


# ============================================================================
# Operations
# ============================================================================

def clear_denominators(log_form: LogForm) -> PForm:
    """(prod f_j^(n_j+1)) times the form, as a holomorphic 1-form of order N-1."""
    ambient = log_form.ambient
    fs = [b.f.truncate(ambient.order) for b in log_form.branches]
    h = log_form.numerator.truncate(ambient.order)
    q = ambient.one()
    for b, f in zip(log_form.branches, fs):
        q = q * f**b.excess
    result = PForm.zero(ambient.with_order(ambient.order - 1), 1)
    for j, (b, f) in enumerate(zip(log_form.branches, fs)):
        others = ambient.one()
        for k, g in enumerate(fs):
            if k != j:
                others = others * g
        df = exterior_d(PForm.function(f))
        coeff = (q * others).scale(b.residue) - (h * others).scale(b.excess)
        result = result + df.multiply(coeff)
    if not h.is_zero():
        product = ambient.one()
        for f in fs:
            product = product * f
        result = result + exterior_d(PForm.function(h)).multiply(product)
    return result


@dataclass(frozen=True)
class IntegratingFactor:
    factor: Optional[Jet]
    residual: Optional[PForm]
    degree_bound: int
    solution_dimension: int
    order: int


def integrating_factor_solve(omega: PForm, k_max: int) -> IntegratingFactor:
    """A polynomial f of degree <= k_max with f d(omega) = df ^ omega, if one exists."""
    if omega.degree != 1:
        raise FormDegreeError("integrating factors are solved for 1-forms")
    if k_max < 0:
        raise GermCalcError(f"degree bound must be non-negative, got {k_max}")
    ambient = omega.ambient
    v = omega.valuation()
    if v is None:
        raise GermCalcError("integrating factor of the zero form")
    bound = min(k_max, ambient.order - v)
    if bound < k_max:
        logger.warning("logforms.intfactor.bound_clamped", requested=k_max, used=bound, order=ambient.order)
    monomials = monomials_up_to(ambient.n_vars, bound)
    columns = [closedness_residual(omega, Jet.monomial(ambient.field, ambient.n_vars, ambient.order, m)) for m in monomials]
    order = columns[0].order
    row_keys: List[Tuple[Tuple[int, ...], Exponent]] = []
    seen = set()
    for col in columns:
        for index, jet in col.items():
            for exp, _ in jet.terms():
                if (index, exp) not in seen:
                    seen.add((index, exp))
                    row_keys.append((index, exp))
    field = ambient.field
    rows = [[col.component(index).coefficient(exp) for col in columns] for index, exp in row_keys]
    basis = nullspace(rows, len(monomials), field) if rows else [
        [field.one() if i == j else field.zero() for i in range(len(monomials))] for j in range(len(monomials))
    ]
    if not basis:
        logger.info("logforms.intfactor.none", degree_bound=bound)
        return IntegratingFactor(None, None, bound, 0, order)
    vector = canonical_nullspace_vector(basis)
    f = Jet(field, ambient.n_vars, ambient.order, dict(zip(monomials, vector)))
    residual = closedness_residual(omega, f)
    logger.info("logforms.intfactor.found", degree_bound=bound, dimension=len(basis))
    return IntegratingFactor(f, residual, bound, len(basis), order)


def iso_cofactor(phi: DiffeoJet, omega: PForm) -> Membership:
    """Solve Phi^* Omega = u Omega by graded elimination."""
    if phi.n_vars != omega.n_vars or phi.field != omega.field:
        raise GermCalcError("diffeomorphism and form live in different ambients")
    if omega.degree == 0:
        raise FormDegreeError("cofactors are defined for forms of positive degree")
    pulled = pullback(phi, omega)
    base = omega.truncate(pulled.order)
    _, targets = _form_components(pulled)
    _, divisors = _form_components(base)
    result = graded_quotient(targets, divisors)
    if result.quotient is None:
        degree = result.failed_degree if result.failed_degree is not None else pulled.order
        partial = result.partial.with_order(pulled.order) if result.partial is not None else pulled.ambient.zero()
        residual = (pulled - base.multiply(partial)).homogeneous_part(degree)
        logger.info("logforms.iso", member=False, failed_degree=result.failed_degree)
        return Membership("no", residual=residual, failed_degree=result.failed_degree, order=pulled.order)
    u = result.quotient
    if u.constant_term().is_zero():
        logger.info("logforms.iso", member=False, reason="cofactor is not a unit")
        return Membership("no", residual=pulled - base.multiply(u.with_order(pulled.order)), order=result.order)
    logger.info("logforms.iso", member=True, order=result.order)
    return Membership("yes", cofactor=u, order=result.order)


def cofactor_cocycle(u: Jet, phi: DiffeoJet, k: int) -> Jet:
    """Cofactor of Phi^k from the cofactor u of Phi: u_{k+1} = (u_k o Phi) u."""
    if k < 0:
        raise GermCalcError("cofactor_cocycle needs k >= 0")
    order = min(u.order, phi.order)
    u = u.truncate(order)
    current = u.like(order=order) + 1
    for _ in range(k):
        current = phi.pull(current) * u
    return current


def composite_cofactor(u: Jet, psi: DiffeoJet, v: Jet) -> Jet:
    """Cofactor of Phi o Psi from cofactors u of Phi and v of Psi."""
    order = min(u.order, v.order, psi.order)
    return psi.pull(u.truncate(order)) * v.truncate(order)


def residue_action(phi: DiffeoJet, log_form: LogForm) -> Tuple[Tuple[int, ...], Scalar, int]:
    """(sigma, C, m) with f_sigma(i) o Phi divisible by f_i and lambda_sigma(i) = C lambda_i."""
    branches = log_form.branches
    r = len(branches)
    sigma: List[int] = []
    for i, bi in enumerate(branches):
        matches = []
        for j, bj in enumerate(branches):
            composed = phi.pull(bj.f)
            if graded_quotient([composed], [bi.f]).quotient is not None:
                matches.append(j)
        if len(matches) != 1:
            raise BranchMatchError(f"branch {i + 1} matches {len(matches)} image branches")
        sigma.append(matches[0])
    if sorted(sigma) != list(range(r)):
        raise BranchMatchError("branch images do not form a permutation")
    residues = log_form.residues
    base = next((i for i, lam in enumerate(residues) if not lam.is_zero()), None)
    if base is None:
        raise ResidueActionError("all residues vanish")
    c = residues[sigma[base]] / residues[base]
    tol = 0.0 if c.field.is_exact else get_config().float_tolerance
    for i in range(r):
        if not (residues[sigma[i]] - c * residues[i]).is_negligible(tol):
            raise ResidueActionError(
                "no constant C with lambda_sigma(i) = C lambda_i; Phi is outside Iso or a first integral exists"
            )
    m, j = 1, sigma[0]
    while j != 0:
        j = sigma[j]
        m += 1
    if not (c**m - 1).is_negligible(tol):
        raise ResidueActionError(f"C^{m} != 1")
    logger.info("logforms.residue_action", permutation=sigma, cycle=m)
    return tuple(sigma), c, m


def alpha_from_valuations(log_form: LogForm) -> Scalar:
    """alpha = sum_j k_j lambda_j with k_j the vanishing order of f_j at the origin."""
    alpha = log_form.field.zero()
    for b in log_form.branches:
        k = b.f.valuation()
        if k is None:
            raise BranchMatchError("branch is identically zero")
        alpha = alpha + b.residue * k
    return alpha


def _is_conical(omega: PForm) -> bool:
    if not omega.is_homogeneous():
        return False
    radial = VectorField.radial(omega.ambient)
    return interior_product(radial, omega).is_zero()


def _unipotent_fix(phi: DiffeoJet, omega: PForm) -> FixVerdict:
    x = diffeo_log(phi)
    f = interior_product(x.truncate(omega.order), omega).as_function()
    if f.is_zero():
        return FixVerdict("yes", "log(Phi) is tangent to the foliation", generator=x)
    residual = closedness_residual(omega, f)
    return FixVerdict(
        "no", "log(Phi) is transverse; i_X(omega) is an integrating factor", generator=x, factor=f, closedness=residual
    )


def fix_test(
    phi: DiffeoJet,
    omega: PForm,
    conical: Optional[bool] = None,
    unipotent: Optional[bool] = None,
    log_form: Optional[LogForm] = None,
) -> IsoVerdict:
    """Three-way decision of Fix membership for Phi in Iso."""
    if omega.degree != 1:
        raise FormDegreeError("fix_test works with 1-forms")
    member = iso_cofactor(phi, omega)
    if not member.member:
        raise NotInIsoError("Phi does not preserve the foliation")
    is_conical = _is_conical(omega) if conical is None else conical
    if is_conical:
        rho = scalar_value(phi.linear_part())
        verdict = (
            FixVerdict("yes", "conical form and scalar linear part")
            if rho is not None
            else FixVerdict("no", "conical form and non-scalar linear part")
        )
        return _done(member, verdict)
    if log_form is not None and _tangent_to_identity(phi):
        alpha = alpha_from_valuations(log_form)
        if not alpha.is_zero():
            return _done(member, FixVerdict("yes", "tangent-to-identity logarithmic"))
    is_unipotent = phi.is_unipotent() if unipotent is None else unipotent
    if is_unipotent:
        return _done(member, _unipotent_fix(phi, omega))
    try:
        jordan = jordan_decompose(phi)
    except EigenvalueFieldError as exc:
        return _done(member, FixVerdict("unknown", f"Jordan decomposition unavailable: {exc}"))
    part = _unipotent_fix(jordan.unipotent, omega)
    if part.status == "yes":
        reason = "unipotent part fixes leaves; Fix membership reduces to the semisimple part, which is undecided"
    else:
        reason = "unipotent part moves leaves; semisimple part undecided"
    return _done(member, FixVerdict("unknown", reason, generator=part.generator, factor=part.factor))


def _tangent_to_identity(phi: DiffeoJet) -> bool:
    rho = scalar_value(phi.linear_part())
    return rho is not None and rho.is_one()


def _done(member: Membership, verdict: FixVerdict) -> IsoVerdict:
    logger.info("logforms.fix", status=verdict.status, reason=verdict.reason)
    return IsoVerdict(member, verdict)


# ============================================================================
# Supplementary procedures
# ============================================================================

@dataclass(frozen=True)
class FirstIntegralStatus:
    status: Literal["holomorphic", "meromorphic", "none", "assumed_none"]
    ratios: Tuple[Optional[Fraction], ...]


def first_integral_status(residues: Sequence[Scalar]) -> FirstIntegralStatus:
    """Whether prod f_j^(a_j) with integers a_j is a first integral of sum lambda_j df_j/f_j."""
    base = next((lam for lam in residues if not lam.is_zero()), None)
    if base is None:
        raise ResidueActionError("all residues vanish")
    ratios = tuple((lam / base).rational_value() for lam in residues)
    exact = base.field.is_exact
    if any(q is None for q in ratios):
        status = "none" if exact else "assumed_none"
    elif all(q > 0 for q in ratios):  # type: ignore[operator]
        status = "holomorphic"
    else:
        status = "meromorphic"
    logger.info("logforms.first_integral", status=status)
    return FirstIntegralStatus(status, ratios)  # type: ignore[arg-type]


def absorb_exact_part(log_form: LogForm) -> LogForm:
    """Rewrite lambda_1 df_1/f_1 + ... + dH as a purely logarithmic form via f_1 exp(H / lambda_1)."""
    if any(b.excess for b in log_form.branches):
        raise GermCalcError("absorb_exact_part needs all exponent excesses n_j = 0")
    h = log_form.numerator
    if h.is_zero():
        return log_form
    first = log_form.branches[0]
    if first.residue.is_zero():
        raise GermCalcError("absorb_exact_part needs lambda_1 != 0")
    if not h.constant_term().is_zero():
        raise JetError("absorb_exact_part needs H(0) = 0")
    unit = jet_exp(h.scale(first.residue.inverse()))
    new_first = Branch(first.residue, first.f * unit.truncate(first.f.order), 0)
    return LogForm(
        (new_first,) + log_form.branches[1:],
        Jet.zero(h.field, h.n_vars, h.order),
        log_form.check_units,
    )


@dataclass(frozen=True)
class RegularIsoCheck:
    member: bool
    offending: Tuple[Tuple[int, int], ...]


def regular_iso_check(phi: DiffeoJet, p: int) -> RegularIsoCheck:
    """Phi preserves dz_1 ^ ... ^ dz_p iff dPhi_i/dz_j = 0 for i <= p < j."""
    n = phi.n_vars
    if not 1 <= p <= n:
        raise FormDegreeError(f"regular foliation needs 1 <= p <= n, got p={p}")
    offending = []
    for i in range(p):
        for j in range(p, n):
            if not phi.components[i].derivative(j).is_zero():
                offending.append((i, j))
    return RegularIsoCheck(not offending, tuple(offending))

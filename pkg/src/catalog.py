"""
Named example foliations with machine-checked facts.

Every scenario builds its objects, runs them through the engine and records a
transcript: one Fact per claim, with status pass, fail or assumption.
Assumptions are statements the jet computations cannot decide; they are
recorded and never counted as checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Set, Tuple

from src.blowup import blowup_pullback
from src.calculus import (
    DiffeoJet,
    PForm,
    VectorField,
    homogeneous_integrating_factor,
    integrability_check,
    interior_product,
    pullback,
    quasi_homogeneity_check,
    wedge,
)
from src.coeff import GAUSSIAN, CyclotomicField, Field, Scalar, root_of_unity_order
from src.config import get_config
from src.errors import GermCalcError, UnknownScenarioError
from src.germdiff import formal_flow
from src.jets import Ambient
from src.linalg import Matrix, identity, matmul, matrices_equal
from src.logforms import (
    LogForm,
    Membership,
    clear_denominators,
    first_integral_status,
    fix_test,
    integrating_factor_solve,
    iso_cofactor,
    regular_iso_check,
    residue_action,
)
from src.logging_config import get_structured_logger
from src.rigidity import isotropy_lie_algebra

logger = get_structured_logger(__name__)

FactStatus = Literal["pass", "fail", "assumption"]


@dataclass(frozen=True)
class Fact:
    claim: str
    status: FactStatus
    detail: str = ""


@dataclass
class Scenario:
    id: str
    description: str
    objects: Dict[str, str] = dc_field(default_factory=dict)
    facts: List[Fact] = dc_field(default_factory=list)
    data: Dict[str, Any] = dc_field(default_factory=dict)

    def check(self, claim: str, ok: bool, detail: str = "") -> bool:
        self.facts.append(Fact(claim, "pass" if ok else "fail", detail))
        return ok

    def assume(self, claim: str, detail: str = "") -> None:
        self.facts.append(Fact(claim, "assumption", detail))

    @property
    def passed(self) -> bool:
        return all(f.status != "fail" for f in self.facts)

    @property
    def checked(self) -> int:
        return sum(1 for f in self.facts if f.status != "assumption")


def _constant_cofactor(member: Membership) -> Optional[Scalar]:
    u = member.cofactor
    if u is None or u.n_terms() != 1 or u.valuation() != 0:
        return None
    return u.constant_term()


# ============================================================================
# Jouanolou
# ============================================================================

def jouanolou_degree(n: int, d: int) -> int:
    return (d ** (n + 1) - 1) // (d - 1)


def jouanolou_field(ambient: Ambient, d: int) -> VectorField:
    """X = sum_j x_(j-1)^d d/dx_j, indices cyclic."""
    xs = ambient.variables()
    m = ambient.n_vars
    return VectorField([xs[(j - 1) % m] ** d for j in range(m)])


def _normalize(a: Matrix) -> Tuple[Tuple[Scalar, ...], ...]:
    lead = next(v for row in a for v in row if not v.is_zero())
    inv = lead.inverse()
    return tuple(tuple(v * inv for v in row) for row in a)


def projective_closure(generators: Sequence[Matrix], bound: Optional[int] = None) -> Optional[int]:
    """Order of the group generated modulo scalars, or None past `bound` elements."""
    bound = get_config().group_closure_bound if bound is None else bound
    field = generators[0][0][0].field
    start = identity(field, len(generators[0]))
    seen = {_normalize(start)}
    frontier = [start]
    while frontier:
        nxt = []
        for m in frontier:
            for g in generators:
                product = matmul(m, g)
                key = _normalize(product)
                if key in seen:
                    continue
                seen.add(key)
                nxt.append(product)
                if len(seen) > bound:
                    logger.warning("catalog.closure_bound_exceeded", bound=bound)
                    return None
        frontier = nxt
    return len(seen)


def matrix_order(a: Matrix, bound: int) -> Optional[int]:
    one = identity(a[0][0].field, len(a))
    power = a
    for k in range(1, bound + 1):
        if matrices_equal(power, one):
            return k
        power = matmul(power, a)
    return None


def normal_form_words(tau: Matrix, rho: Matrix, tau_order: int, rho_order: int) -> Optional[int]:
    """Count the classes tau^a rho^b modulo scalars; None when they are not closed under tau and rho."""
    field = tau[0][0].field
    words: Set[Tuple[Tuple[Scalar, ...], ...]] = set()
    tau_power = identity(field, len(tau))
    for _ in range(tau_order):
        word = tau_power
        for _ in range(rho_order):
            words.add(_normalize(word))
            word = matmul(word, rho)
        tau_power = matmul(tau_power, tau)
    for key in list(words):
        element = [list(row) for row in key]
        if any(_normalize(matmul(element, g)) not in words for g in (tau, rho)):
            return None
    return len(words)


def build_jouanolou(n: int, d: int) -> Scenario:
    """Omega = i_R i_X (dx_1 ^ ... ^ dx_(n+1)) with its symmetry group over Q(zeta_D)."""
    if n < 2 or d < 2:
        raise GermCalcError("jouanolou needs n >= 2 and d >= 2")
    big_d = jouanolou_degree(n, d)
    field = CyclotomicField(big_d)
    m = n + 1
    ambient = Ambient(field, m, d + 2)
    x_field = jouanolou_field(ambient, d)
    radial = VectorField.radial(ambient)
    omega = interior_product(radial, interior_product(x_field, PForm.volume(ambient)))
    lam = field.zeta(1)
    tau: Matrix = [
        [lam ** ((d**j - 1) // (d - 1)) if i == j else field.zero() for j in range(m)] for i in range(m)
    ]
    rho: Matrix = [[field.one() if k == (i - 1) % m else field.zero() for k in range(m)] for i in range(m)]

    scenario = Scenario("jouanolou", f"Jouanolou foliation of degree {d} on C^{m}")
    scenario.data.update(n=n, d=d, D=big_d)
    scenario.objects.update(omega=omega.to_dsl(), X=x_field.to_dsl())
    scenario.check("D = (d^(n+1) - 1)/(d - 1)", big_d == jouanolou_degree(n, d), f"D = {big_d}")
    scenario.check("Omega is conical (i_R Omega = 0)", interior_product(radial, omega).is_zero())

    for name, matrix in (("tau", tau), ("rho", rho)):
        member = iso_cofactor(DiffeoJet.linear(ambient, matrix), omega)
        c = _constant_cofactor(member)
        ok = c is not None and (root_of_unity_order(c) or 0) > 0 and big_d % (root_of_unity_order(c) or 1) == 0
        scenario.check(f"{name}^* Omega = c Omega with c a power of zeta_{big_d}", ok, c.to_text() if c else "")
        scenario.data[f"{name}_scalar"] = c.to_dsl() if c else None

    order = matrix_order(tau, big_d)
    scenario.check("tau has order D", order == big_d, f"order {order}")
    group = projective_closure([tau, rho])
    scenario.data["group_order"] = group
    scenario.check("group generated by tau, rho is finite modulo scalars", group is not None, f"order {group}")
    scenario.check("group order equals D (n+1)", group == big_d * m, f"{group} vs {big_d * m}")
    words = normal_form_words(tau, rho, big_d, m)
    scenario.data["normal_form_count"] = words
    scenario.check("every element is tau^a rho^b with a < D and b < n+1", words == big_d * m, f"{words} classes")
    scenario.check("closure order matches the normal form count", group == words, f"{group} vs {words}")
    return scenario


# ============================================================================
# Named scenarios
# ============================================================================

def _two_vars(order: int = 6, field: Field = GAUSSIAN) -> Ambient:
    return Ambient(field, 2, order)


def _flow_tangent() -> Scenario:
    s = Scenario("flow-tangent", "time-1/2 flow of a field tangent to y dx + 2x dy")
    amb = _two_vars()
    x, y = amb.variables()
    omega = PForm.one_form([y, 2 * x])
    field = VectorField([(x + y) * x * 2, -(x + y) * y])
    phi = formal_flow(field).evaluate(Fraction(1, 2))
    s.objects.update(omega=omega.to_dsl(), X=field.to_dsl(), phi=phi.to_dsl())
    s.check("i_X omega = 0", interior_product(field, omega).is_zero())
    s.check("omega is integrable", integrability_check(omega).integrable)
    verdict = fix_test(phi, omega)
    s.check("exp(X/2) lies in Iso", verdict.member.member)
    s.check("exp(X/2) lies in Fix", verdict.fix is not None and verdict.fix.status == "yes", verdict.fix.reason if verdict.fix else "")
    return s


def _delta_cycle() -> Scenario:
    s = Scenario("delta-cycle", "cyclic permutation of three branches with residues 1, zeta3, zeta3^2")
    field = CyclotomicField(3)
    amb = Ambient(field, 3, 5)
    x, y, z = amb.variables()
    zeta = field.zeta(1)
    log_form = LogForm.logarithmic([(field.one(), x), (zeta, y), (zeta**2, z)])
    omega = clear_denominators(log_form)
    phi = DiffeoJet([z, x, y])
    s.objects.update(log_form=log_form.to_dsl(), omega=omega.to_dsl(), phi=phi.to_dsl())
    member = iso_cofactor(phi, omega)
    c = _constant_cofactor(member)
    s.check("Phi^* Omega = zeta3 Omega", c is not None and c == zeta, c.to_dsl() if c else "no constant cofactor")
    sigma, big_c, cycle = residue_action(phi, log_form)
    s.data.update(sigma=list(sigma), C=big_c.to_dsl(), m=cycle)
    s.check("residue action is a 3-cycle", cycle == 3 and sorted(sigma) == [0, 1, 2] and sigma[0] != 0)
    s.check("C = zeta3", big_c == zeta, big_c.to_dsl())
    s.check("C^3 = 1", (big_c**3).is_one())
    status = first_integral_status(log_form.residues)
    s.check("no first integral of the form prod f_j^a_j", status.status == "none", status.status)
    verdict = fix_test(phi, omega)
    s.check("Phi is not in Fix (conical form, non-scalar linear part)", verdict.fix is not None and verdict.fix.status == "no")
    return s


def _rigid_log() -> Scenario:
    s = Scenario("rigid-log", "logarithmic forms whose branch lowest jets are rigid tuples")
    amb = _two_vars(4)
    x, y = amb.variables()
    i = GAUSSIAN.i()
    cases = (
        ("H1", [(1, x + y**2), (i, y + x**3), (1 + i, x + y + x * y)], [x, y, x + y]),
        ("H2", [(1, x * y**2 + x**4 + y**4), (i, x + y + x**2)], [x * y**2, x + y]),
    )
    for name, pairs, expected in cases:
        log_form = LogForm.logarithmic(pairs)
        omega = clear_denominators(log_form)
        jets = [b.f.leading_form() for b in log_form.branches]
        s.objects[f"Omega_{name}"] = log_form.to_dsl()
        s.objects[name] = "(" + ", ".join(p.to_dsl() for p in jets) + ")"
        s.check(f"cleared Omega_{name} is integrable", integrability_check(omega).integrable)
        s.check(f"lowest jets of the branches are {s.objects[name]}", jets == expected)
        report = isotropy_lie_algebra(jets)
        s.data[f"{name}_dimension"] = report.dimension
        s.check(f"{name} is infinitesimally rigid", report.rigid_infinitesimal, f"dimension {report.dimension}")
        s.check(f"{name} Lie algebra contains the identity with Euler weights", report.contains_identity)
        s.check(f"{name} solution space is closed under brackets", report.bracket_closed)
        s.check(f"{name} has no permutation isotropy", report.rigid_assumed)
    s.assume("I(H) = C* I (finite components beyond coordinate permutations are not searched)")
    return s


def _log_dilation() -> Scenario:
    s = Scenario("log-dilation", "homogeneous non-conical logarithmic form dx/x + 2 dy/y")
    amb = _two_vars()
    x, y = amb.variables()
    log_form = LogForm.logarithmic([(1, x), (2, y)])
    omega = clear_denominators(log_form)
    s.objects.update(log_form=log_form.to_dsl(), omega=omega.to_dsl())
    radial = VectorField.radial(omega.ambient)
    s.check("omega is not conical", not interior_product(radial, omega).is_zero())
    certificate = homogeneous_integrating_factor(omega)
    s.check("i_R omega is an integrating factor", certificate is not None and certificate.closed)
    solved = integrating_factor_solve(omega, 2)
    s.check(
        "integrating factor solve recovers xy",
        solved.factor is not None and solved.factor == x * y,
        solved.factor.to_dsl() if solved.factor is not None else "none",
    )
    member = iso_cofactor(DiffeoJet.dilation(omega.ambient, 2), omega)
    c = _constant_cofactor(member)
    s.check("dilation by 2 has cofactor 2^(d+1) = 4", c is not None and c == 4, c.to_dsl() if c else "")
    status = first_integral_status(log_form.residues)
    s.check("x y^2 is a holomorphic first integral", status.status == "holomorphic", status.status)
    return s


def _wedge_product() -> Scenario:
    s = Scenario("wedge-product", "codimension-two foliation (y dx + 2x dy) ^ dz and product diffeomorphisms")
    amb = Ambient(GAUSSIAN, 3, 5)
    x, y, z = amb.variables()
    zero = amb.zero()
    w1 = PForm.one_form([y, 2 * x, zero])
    w2 = PForm.differential(amb, 2)
    eta = wedge(w1, w2)
    phi = DiffeoJet([2 * x + x * x, 2 * y, 3 * z + z * z])
    s.objects.update(eta=eta.to_dsl(), phi=phi.to_dsl())
    report = integrability_check(eta, [w1, w2])
    s.check("eta is integrable and decomposes as w1 ^ w2", report.integrable and bool(report.decomposes))
    in_w1 = iso_cofactor(phi, w1).member
    in_w2 = iso_cofactor(phi, w2).member
    s.check("Phi lies in Iso(w2)", in_w2)
    s.data["phi_in_iso_w1"] = in_w1
    product = DiffeoJet([2 * x, 2 * y, 3 * z + z * z])
    s.check("product of a dilation and a map of z lies in Iso(eta)", iso_cofactor(product, eta).member)
    s.assume("Iso(F_eta) equals the intersection of Iso(F_w1) and Iso(F_w2)")
    return s


def _involution() -> Scenario:
    s = Scenario("involution", "eta = omega ^ Phi^* omega for the involution swapping x and y")
    amb = _two_vars(4)
    x, y = amb.variables()
    omega = PForm.differential(amb, 0)
    phi = DiffeoJet([y, x])
    eta = wedge(omega, pullback(phi, omega))
    s.objects.update(omega=omega.to_dsl(), eta=eta.to_dsl(), phi=phi.to_dsl())
    s.check("Phi is an involution", phi.compose(phi).is_identity())
    s.check("Phi is outside Iso(omega)", not iso_cofactor(phi, omega).member)
    c = _constant_cofactor(iso_cofactor(phi, eta))
    s.check("Phi^* eta = -eta", c is not None and c == -1, c.to_dsl() if c else "")
    return s


def _homogeneous() -> Scenario:
    s = Scenario("homogeneous", "homogeneous 1-form x^2 dy - y^2 dx: Lie derivative along R and dilations")
    amb = _two_vars()
    x, y = amb.variables()
    omega = PForm.one_form([-(y * y), x * x])
    s.objects["omega"] = omega.to_dsl()
    radial = VectorField.radial(amb)
    qh = quasi_homogeneity_check(omega, radial)
    s.check("L_R omega = (d + p) omega with d = 2, p = 1", qh.weight == 3, f"weight {qh.weight}")
    member = iso_cofactor(DiffeoJet.dilation(amb, 2), omega)
    c = _constant_cofactor(member)
    s.check("dilation by 2 has cofactor 2^3", c is not None and c == 8, c.to_dsl() if c else "")
    return s


def _regular() -> Scenario:
    s = Scenario("regular", "regular foliation dx: Phi preserves it iff dPhi_1/dy = 0")
    amb = _two_vars()
    x, y = amb.variables()
    omega = PForm.differential(amb, 0)
    good = DiffeoJet([x + x * x, y + x * y])
    bad = DiffeoJet([x + y * y, y])
    s.objects.update(omega=omega.to_dsl(), good=good.to_dsl(), bad=bad.to_dsl())
    for name, phi, expected in (("good", good, True), ("bad", bad, False)):
        criterion = regular_iso_check(phi, 1).member
        solve = iso_cofactor(phi, omega).member
        s.check(f"{name}: criterion and cofactor solve agree ({expected})", criterion == solve == expected)
    return s


def _cusp_blowup() -> Scenario:
    s = Scenario("cusp-blowup", "blow-up of the cusp x^2 + y^3 and of dx/x + 3 dy/y")
    amb = _two_vars(3)
    x, y = amb.variables()
    cusp = x * x + y**3
    result = blowup_pullback(cusp)
    chart = Ambient(GAUSSIAN, 2, result.stricts[0].order)
    cx, ct = chart.variables()
    s.objects["cusp"] = cusp.to_dsl()
    s.check("cusp multiplicity is 2", result.multiplicities == (2,))
    s.check("strict transform is 1 + x t^3", result.stricts[0] == 1 + cx * ct**3, result.stricts[0].to_dsl(["x", "t"]))
    log_form = LogForm.logarithmic([(1, x), (3, y)])
    pulled = blowup_pullback(log_form)
    s.check("alpha = 1 + 3", pulled.alpha is not None and pulled.alpha == 4)
    s.check("pulled form is closed", bool(pulled.closed))
    s.check(
        "pulled form equals alpha dx/x + sum lambda_j d(strict_j)/strict_j",
        pulled.shape_residual is not None and pulled.shape_residual.is_zero(),
    )
    return s


SCENARIOS: Dict[str, Tuple[str, Callable[[], Scenario]]] = {
    "jouanolou": ("Jouanolou foliation (n=2, d=2) and its symmetry group", lambda: build_jouanolou(2, 2)),
    "flow-tangent": ("flow of a tangent field is in Fix", _flow_tangent),
    "delta-cycle": ("residue permutation by a cyclic coordinate shift", _delta_cycle),
    "rigid-log": ("logarithmic forms whose branch lowest jets are rigid tuples", _rigid_log),
    "log-dilation": ("homogeneous logarithmic form, integrating factor, dilation cofactor", _log_dilation),
    "wedge-product": ("codimension-two foliation built from a wedge product", _wedge_product),
    "involution": ("involution acting by -1 on a 2-form", _involution),
    "homogeneous": ("Lie derivative along the radial field and dilation cofactors", _homogeneous),
    "regular": ("isotropy criterion for the regular foliation", _regular),
    "cusp-blowup": ("strict transform of the cusp and the exceptional residue", _cusp_blowup),
}


def list_scenarios() -> List[Tuple[str, str]]:
    return [(key, desc) for key, (desc, _) in SCENARIOS.items()]


def build_named(scenario_id: str) -> Scenario:
    """Build and verify a named scenario."""
    entry = SCENARIOS.get(scenario_id)
    if entry is None:
        raise UnknownScenarioError(f"unknown scenario '{scenario_id}' (known: {', '.join(SCENARIOS)})")
    scenario = entry[1]()
    logger.info("catalog.scenario", id=scenario_id, passed=scenario.passed, facts=len(scenario.facts))
    return scenario

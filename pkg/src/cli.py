"""
Command-line entry point: `germcalc <command> [--vars n] [--order N] [--field F] [--json]`.

Exit codes: 0 when every check passes, 1 when a mathematical verdict is
negative, 2 for usage, parse and precondition errors. Reports go to stdout,
logs to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel

from src.blowup import blowup_pullback, centralizer_classify, normal_form_1d
from src.calculus import (
    DiffeoJet,
    PForm,
    VectorField,
    homogeneous_integrating_factor,
    integrability_check,
    pullback,
)
from src.catalog import Scenario, build_jouanolou, build_named, list_scenarios
from src.coeff import F64, Scalar, field_from_spec
from src.config import get_config
from src.dsl import Context, Value, evaluate_source, expect
from src.errors import (
    GermCalcError,
    NonHomogeneousError,
    NonNilpotentFlowError,
    NotInCentralizerError,
    ResidueActionError,
    TangencyUndefinedError,
    UsageError,
)
from src.germdiff import commutes, diffeo_log, flow_at, formal_flow, jordan_decompose, poincare_linearize
from src.holonomy import HolonomyField, Loop, holonomy_map, ramification_check, tangency_order
from src.jets import Ambient, Jet
from src.logforms import (
    Branch,
    FixVerdict,
    LogForm,
    alpha_from_valuations,
    clear_denominators,
    first_integral_status,
    fix_test,
    integrating_factor_solve,
    iso_cofactor,
    residue_action,
)
from src.logging_config import configure_logging, get_structured_logger
from src.models import (
    BlowupReportModel,
    CentralizerModel,
    CommandReport,
    ErrorResponse,
    ExpressionText,
    FactModel,
    FixVerdictModel,
    FlowReportModel,
    FormReportModel,
    HolonomyReportModel,
    IntegrabilityReportModel,
    IntegratingFactorModel,
    IsoVerdictModel,
    JordanReportModel,
    LieElementModel,
    NormalFormModel,
    ResidueActionModel,
    ResonantTermModel,
    RigidityReportModel,
    ScalarText,
    ScenarioListModel,
    ScenarioTranscriptModel,
)
from src.rigidity import isotropy_lie_algebra

logger = get_structured_logger(__name__)


# ============================================================================
# Rendering helpers
# ============================================================================

def scalar_text(s: Scalar) -> ScalarText:
    z = s.to_complex()
    return ScalarText(text=s.to_dsl(), real=z.real, imag=z.imag, exact=s.field.is_exact)


def expression(value: Union[Value, VectorField]) -> ExpressionText:
    if isinstance(value, Scalar):
        return ExpressionText(kind="scalar", text=value.to_dsl(), zero=value.is_zero())
    if isinstance(value, Jet):
        return ExpressionText(kind="function", text=value.to_dsl(), order=value.order, zero=value.is_zero())
    if isinstance(value, PForm):
        return ExpressionText(
            kind="form", text=value.to_dsl(), order=value.order, degree=value.degree, zero=value.is_zero()
        )
    if isinstance(value, VectorField):
        return ExpressionText(kind="vector_field", text=value.to_dsl(), order=value.order, zero=value.is_zero())
    if isinstance(value, DiffeoJet):
        return ExpressionText(kind="map", text=value.to_dsl(), order=value.order)
    return ExpressionText(kind="logform", text=value.to_dsl(), order=value.order)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Scalar):
        return value.to_dsl()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "to_dsl"):
        return value.to_dsl()
    return str(value)


# ============================================================================
# Commands
# ============================================================================

@dataclass
class Outcome:
    result: BaseModel
    verdict: Optional[bool] = None
    warnings: List[str] = dc_field(default_factory=list)


def _value(text: str, ctx: Context, kind: str, what: str) -> Any:
    return expect(evaluate_source(text, ctx), kind, what, ctx)


def _form_or_log(text: str, ctx: Context, what: str) -> Tuple[PForm, Optional[LogForm]]:
    """A holomorphic form; logform{...} input is cleared of denominators."""
    value = evaluate_source(text, ctx)
    if isinstance(value, LogForm):
        return clear_denominators(value), value
    return expect(value, "form", what), None


def _order_warnings(ctx: Context, *values: Any) -> List[str]:
    warnings = []
    for value in values:
        order = getattr(value, "order", None)
        if isinstance(order, int) and order < ctx.order:
            warnings.append(f"effective order lowered from {ctx.order} to {order}")
    return sorted(set(warnings))


def _fix_model(verdict: FixVerdict) -> FixVerdictModel:
    return FixVerdictModel(
        status=verdict.status,
        reason=verdict.reason,
        generator=expression(verdict.generator) if verdict.generator is not None else None,
        factor=expression(verdict.factor) if verdict.factor is not None else None,
        closedness=expression(verdict.closedness) if verdict.closedness is not None else None,
    )


def _fix_verdict(status: str) -> Optional[bool]:
    return {"yes": True, "no": False}.get(status)


def cmd_check_integrable(args: argparse.Namespace, ctx: Context) -> Outcome:
    omega, _ = _form_or_log(args.form, ctx, "--form")
    factors = [_value(f, ctx, "form", "--factor") for f in args.factor] or None
    report = integrability_check(omega, factors)
    result = IntegrabilityReportModel(
        integrable=report.integrable,
        order=report.order,
        residuals=[expression(r) for r in report.residuals if not r.is_zero()],
        decomposes=report.decomposes,
    )
    verdict = report.integrable and report.decomposes is not False
    return Outcome(result, verdict, _order_warnings(ctx, omega))


def cmd_pullback(args: argparse.Namespace, ctx: Context) -> Outcome:
    phi = _value(args.map, ctx, "map", "--map")
    target = evaluate_source(args.form, ctx)
    if isinstance(target, LogForm):
        target = clear_denominators(target)
    if isinstance(target, Jet):
        value: Value = phi.pull(target)
    else:
        value = pullback(phi, expect(target, "form", "--form"))
    return Outcome(FormReportModel(value=expression(value)), None, _order_warnings(ctx, value))


def cmd_iso(args: argparse.Namespace, ctx: Context) -> Outcome:
    omega, log_form = _form_or_log(args.form, ctx, "--form")
    phi = _value(args.map, ctx, "map", "--map")
    warnings = list(log_form.assumptions) if log_form is not None else []
    membership = iso_cofactor(phi, omega)
    u = membership.cofactor
    constant = None
    if u is not None and u.n_terms() == 1 and u.valuation() == 0:
        constant = scalar_text(u.constant_term())
    fix = None
    if args.fix:
        if membership.member:
            fix = _fix_model(fix_test(phi, omega, log_form=log_form).fix)  # type: ignore[arg-type]
        else:
            warnings.append("fix test skipped: Phi is not in Iso")
    certificates = {}
    if membership.residual is not None:
        certificates["residual"] = expression(membership.residual)
    result = IsoVerdictModel(
        member=membership.member,
        cofactor=expression(u) if u is not None else None,
        cofactor_constant=constant,
        failed_degree=membership.failed_degree,
        fix=fix,
        certificates=certificates,
    )
    verdict = membership.member and (fix is None or fix.status != "no")
    return Outcome(result, verdict, warnings + _order_warnings(ctx, u))


def cmd_fix(args: argparse.Namespace, ctx: Context) -> Outcome:
    omega, log_form = _form_or_log(args.form, ctx, "--form")
    phi = _value(args.map, ctx, "map", "--map")
    verdict = fix_test(phi, omega, log_form=log_form).fix
    if verdict is None:
        raise GermCalcError("Fix decision was not produced for a member of Iso")
    return Outcome(_fix_model(verdict), _fix_verdict(verdict.status))


def cmd_flow(args: argparse.Namespace, ctx: Context) -> Outcome:
    x = _value(args.vector_field, ctx, "field", "--vector-field")
    t = _value(args.t, ctx, "scalar", "--t") if args.t is not None else None
    try:
        flow = formal_flow(x)
    except NonNilpotentFlowError:
        if t is None:
            raise
        evaluated = flow_at(x, t)
        return Outcome(FlowReportModel(t=scalar_text(t), evaluated=expression(evaluated)))
    result = FlowReportModel(
        polynomial=flow.to_dsl(),
        t_degree=flow.t_degree(),
        t_degree_bound=flow.t_degree_bound(),
        t=scalar_text(t) if t is not None else None,
        evaluated=expression(flow.evaluate(t)) if t is not None else None,
    )
    return Outcome(result)


def _map_difference(a: DiffeoJet, b: DiffeoJet) -> VectorField:
    order = min(a.order, b.order)
    return VectorField([p.truncate(order) - q.truncate(order) for p, q in zip(a.components, b.components)])


def cmd_log(args: argparse.Namespace, ctx: Context) -> Outcome:
    phi = _value(args.map, ctx, "map", "--map")
    x = diffeo_log(phi)
    residual = _map_difference(formal_flow(x).evaluate(1), phi)
    result = FormReportModel(value=expression(x), certificates={"exp_residual": expression(residual)})
    return Outcome(result, residual.is_zero())


def cmd_jordan(args: argparse.Namespace, ctx: Context) -> Outcome:
    phi = _value(args.map, ctx, "map", "--map")
    jordan = jordan_decompose(phi)
    residual_zero = jordan.semisimple.compose(jordan.unipotent).equals(phi)
    commute = commutes(jordan.semisimple, jordan.unipotent)
    result = JordanReportModel(
        semisimple=expression(jordan.semisimple),
        unipotent=expression(jordan.unipotent),
        conjugator=expression(jordan.conjugator),
        eigenvalues=[scalar_text(mu) for mu in jordan.eigenvalues],
        resonant_terms=[
            ResonantTermModel(
                degree=t.degree,
                component=t.component + 1,
                exponent=list(t.exponent),
                coefficient=scalar_text(t.coefficient),
            )
            for t in jordan.resonant_terms
        ],
        commute=commute,
        residual_zero=residual_zero,
    )
    return Outcome(result, residual_zero and commute)


def cmd_linearize(args: argparse.Namespace, ctx: Context) -> Outcome:
    phi = _value(args.map, ctx, "map", "--map")
    g = poincare_linearize(phi)
    conjugated = g.inverse().compose(phi).compose(g)
    linear = DiffeoJet.linear(phi.ambient, phi.linear_part())
    residual = _map_difference(conjugated, linear)
    result = FormReportModel(value=expression(g), certificates={"conjugation_residual": expression(residual)})
    return Outcome(result, residual.is_zero(get_config().float_tolerance if not phi.field.is_exact else None))


def cmd_intfactor(args: argparse.Namespace, ctx: Context) -> Outcome:
    omega, _ = _form_or_log(args.form, ctx, "--form")
    degree = args.degree if args.degree is not None else ctx.order
    if degree < 0:
        raise UsageError("--degree must be non-negative")
    solved = integrating_factor_solve(omega, degree)
    homogeneous = None
    try:
        certificate = homogeneous_integrating_factor(omega)
        if certificate is not None and certificate.closed:
            homogeneous = expression(certificate.factor)
    except NonHomogeneousError:
        pass
    result = IntegratingFactorModel(
        factor=expression(solved.factor) if solved.factor is not None else None,
        degree_bound=solved.degree_bound,
        solution_dimension=solved.solution_dimension,
        closed=solved.residual.is_zero() if solved.residual is not None else None,
        homogeneous_factor=homogeneous,
    )
    warnings = [] if degree == solved.degree_bound else [f"degree bound clamped to {solved.degree_bound}"]
    return Outcome(result, solved.factor is not None, warnings)


def cmd_residues(args: argparse.Namespace, ctx: Context) -> Outcome:
    log_form = _value(args.logform, ctx, "logform", "--logform")
    status = first_integral_status(log_form.residues)
    result = ResidueActionModel(
        residues=[scalar_text(lam) for lam in log_form.residues],
        alpha=scalar_text(alpha_from_valuations(log_form)),
        first_integral=status.status,
        ratios=[str(q) if q is not None else None for q in status.ratios],
    )
    warnings = list(log_form.assumptions)
    if args.map is None:
        return Outcome(result, None, warnings)
    phi = _value(args.map, ctx, "map", "--map")
    try:
        sigma, c, m = residue_action(phi, log_form)
    except ResidueActionError as exc:
        warnings.append(str(exc))
        return Outcome(result, False, warnings)
    result.permutation = [s + 1 for s in sigma]
    result.constant = scalar_text(c)
    result.cycle_length = m
    return Outcome(result, True, warnings)


def _swap_chart(value: Union[LogForm, PForm, Jet], chart: int) -> Union[LogForm, PForm, Jet]:
    """Exchange z_1 and z_chart so that the chart (x, x t) is centred on the requested axis."""
    if chart == 1:
        return value
    n = value.n_vars
    if not 1 <= chart <= n:
        raise UsageError(f"--chart must lie in 1..{n}")
    field = value.field
    matrix = [[field.zero()] * n for _ in range(n)]
    for i in range(n):
        j = chart - 1 if i == 0 else (0 if i == chart - 1 else i)
        matrix[i][j] = field.one()
    phi = DiffeoJet.linear(Ambient(field, n, value.order), matrix)
    if isinstance(value, Jet):
        return phi.pull(value)
    if isinstance(value, PForm):
        return pullback(phi, value)
    return LogForm(
        tuple(Branch(b.residue, phi.pull(b.f), b.excess) for b in value.branches),
        phi.pull(value.numerator),
        value.check_units,
    )


def cmd_blowup(args: argparse.Namespace, ctx: Context) -> Outcome:
    source = evaluate_source(args.form, ctx)
    if isinstance(source, Scalar) or not isinstance(source, (LogForm, PForm, Jet)):
        raise UsageError("blowup takes a logform{...}, a differential form or a function")
    source = _swap_chart(source, args.chart)
    res = blowup_pullback(source)
    shape = res.shape_residual.is_zero() if res.shape_residual is not None else None
    result = BlowupReportModel(
        multiplicities=list(res.multiplicities),
        strict_transforms=[s.to_dsl() for s in res.stricts],
        alpha=scalar_text(res.alpha) if res.alpha is not None else None,
        pulled=expression(res.pulled),
        chart_form=res.chart_log_form.to_dsl() if res.chart_log_form is not None else None,
        closed=res.closed,
        shape_holds=shape,
        precision=res.precision,
        chart=args.chart,
    )
    checks = [c for c in (res.closed, shape) if c is not None]
    warnings = [f"chart jets are exact to x-adic precision {res.precision}"]
    return Outcome(result, all(checks) if checks else None, warnings)


def cmd_normal1d(args: argparse.Namespace, ctx: Context) -> Outcome:
    one = Context(1, ctx.order, ctx.field)
    v = _value(args.v, one, "jet", "--v")
    form = normal_form_1d(args.pole_order, v)
    residual_zero = form.residual.is_zero(None if v.field.is_exact else get_config().float_tolerance)
    centralizer = None
    verdict = residual_zero
    if args.centralizer is not None:
        h = _value(args.centralizer, one, "map", "--centralizer")
        try:
            c = centralizer_classify(form, h)
            centralizer = CentralizerModel(
                kind=c.kind,
                preserves=True,
                delta=scalar_text(c.delta) if c.delta is not None else None,
                rho=scalar_text(c.rho) if c.rho is not None else None,
                t=scalar_text(c.t) if c.t is not None else None,
            )
        except NotInCentralizerError:
            centralizer = CentralizerModel(kind=form.kind, preserves=False)
            verdict = False
    result = NormalFormModel(
        kind=form.kind,
        model=form.model_text(),
        change=expression(form.change),
        residual_zero=residual_zero,
        m=form.m,
        residue=scalar_text(form.residue) if form.residue is not None else None,
        centralizer=centralizer,
    )
    return Outcome(result, verdict, _order_warnings(Context(1, v.order, v.field), form.residual))


def _pair(z: complex) -> List[float]:
    return [z.real, z.imag]


def cmd_holonomy(args: argparse.Namespace, ctx: Context) -> Outcome:
    if args.ramification is not None and args.ramification <= 0:
        raise UsageError("--ramification must be a positive integer")
    plane = Context(2, ctx.order, F64)
    f = _value(args.F, plane, "jet", "--F")
    g = _value(args.G, plane, "jet", "--G")
    loop = Loop.circle(args.center, args.base, args.winding)
    h = holonomy_map(HolonomyField(g, f), loop, args.jet_order)
    try:
        tangency = tangency_order(h, args.tol)
    except TangencyUndefinedError:
        tangency = None
    ramified = None if args.ramification is None else ramification_check(h, args.ramification, args.tol).holds
    result = HolonomyReportModel(
        multiplier=_pair(h.multiplier),
        fitted_multiplier=_pair(h.fitted_multiplier),
        coefficients=[_pair(c) for c in h.coefficients()],
        tangency_order=tangency,
        ramified=ramified,
        diagnostics=h.diagnostics,
    )
    warnings = []
    if h.diagnostics.get("multiplier_discrepancy", 0.0) > 1e-6:
        warnings.append("fitted multiplier disagrees with the exponential integral beyond 1e-6")
    return Outcome(result, ramified, warnings)


def cmd_rigidity(args: argparse.Namespace, ctx: Context) -> Outcome:
    polys = [_value(p, ctx, "jet", "--poly") for p in args.poly]
    report = isotropy_lie_algebra(polys)
    result = RigidityReportModel(
        dimension=report.dimension,
        degrees=list(report.degrees),
        basis=[
            LieElementModel(matrix=[[a.to_dsl() for a in row] for row in m], scalars=[c.to_dsl() for c in cs])
            for m, cs in report.lie_basis
        ],
        contains_identity=report.contains_identity,
        bracket_closed=report.bracket_closed,
        rigid_infinitesimal=report.rigid_infinitesimal,
        rigid_assumed=report.rigid_assumed,
        permutations=[[p + 1 for p in perm] for perm in report.permutations],
        permutation_search_complete=report.permutation_search_complete,
    )
    warnings = [] if report.permutation_search_complete else ["permutation search skipped: n! exceeds bound"]
    return Outcome(result, report.rigid_infinitesimal, warnings)


def transcript(scenario: Scenario) -> ScenarioTranscriptModel:
    return ScenarioTranscriptModel(
        id=scenario.id,
        description=scenario.description,
        passed=scenario.passed,
        checked=scenario.checked,
        objects=dict(scenario.objects),
        facts=[FactModel(claim=f.claim, status=f.status, detail=f.detail) for f in scenario.facts],
        data=_jsonable(scenario.data),
    )


def cmd_catalog(args: argparse.Namespace, ctx: Context) -> Outcome:
    if args.action == "list":
        return Outcome(ScenarioListModel(scenarios=dict(list_scenarios())))
    if not args.scenario:
        raise UsageError("catalog run needs a scenario id")
    if args.scenario == "jouanolou" and (args.n is not None or args.d is not None):
        scenario = build_jouanolou(args.n or 2, args.d or 2)
    else:
        scenario = build_named(args.scenario)
    warnings = [f"assumption: {f.claim}" for f in scenario.facts if f.status == "assumption"]
    return Outcome(transcript(scenario), scenario.passed, warnings)


# ============================================================================
# Argument parsing
# ============================================================================

class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--vars", type=int, default=None, help="number of variables n")
    common.add_argument("--order", type=int, default=None, help="truncation order N")
    common.add_argument("--field", default="gaussian", help="gaussian | cyclotomic:m | f64")
    common.add_argument("--json", action="store_true", help="emit the JSON report")
    return common


COMMANDS: Dict[str, Tuple[str, Callable[[argparse.Namespace, Context], Outcome]]] = {
    "check-integrable": ("Frobenius integrability test", cmd_check_integrable),
    "pullback": ("pull a form or function back along a map", cmd_pullback),
    "iso": ("isotropy membership and cofactor (optionally Fix)", cmd_iso),
    "fix": ("decide Fix membership", cmd_fix),
    "flow": ("exp(tX) of a nilpotent formal field", cmd_flow),
    "log": ("infinitesimal generator of a unipotent map", cmd_log),
    "jordan": ("Jordan decomposition of a map", cmd_jordan),
    "linearize": ("Poincare linearization of rho I + h.o.t.", cmd_linearize),
    "intfactor": ("polynomial integrating factor", cmd_intfactor),
    "residues": ("residues, first integrals and residue action", cmd_residues),
    "blowup": ("pull back into the blow-up chart", cmd_blowup),
    "normal1d": ("one-variable normal forms and centralizers", cmd_normal1d),
    "holonomy": ("numerical holonomy along a circle", cmd_holonomy),
    "rigidity": ("linear isotropy of homogeneous polynomials", cmd_rigidity),
    "catalog": ("named worked examples", cmd_catalog),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="germcalc", description="Exact calculus for germs of holomorphic foliations")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    subs = {name: sub.add_parser(name, parents=[common], help=text) for name, (text, _) in COMMANDS.items()}

    subs["check-integrable"].add_argument("--form", required=True)
    subs["check-integrable"].add_argument("--factor", action="append", default=[], help="omega_j of a p-form")
    subs["pullback"].add_argument("--map", required=True)
    subs["pullback"].add_argument("--form", required=True)
    for name in ("iso", "fix"):
        subs[name].add_argument("--form", required=True)
        subs[name].add_argument("--map", required=True)
    subs["iso"].add_argument("--fix", action="store_true", help="also decide Fix membership")
    subs["flow"].add_argument("--vector-field", required=True)
    subs["flow"].add_argument("--t", default=None)
    for name in ("log", "jordan", "linearize"):
        subs[name].add_argument("--map", required=True)
    subs["intfactor"].add_argument("--form", required=True)
    subs["intfactor"].add_argument("--degree", type=int, default=None)
    subs["residues"].add_argument("--logform", required=True)
    subs["residues"].add_argument("--map", default=None)
    subs["blowup"].add_argument("--form", required=True, help="logform{...}, a form or a function")
    subs["blowup"].add_argument("--chart", type=int, default=1)
    subs["normal1d"].add_argument("--pole-order", type=int, required=True)
    subs["normal1d"].add_argument("--v", required=True)
    subs["normal1d"].add_argument("--centralizer", default=None)
    holo = subs["holonomy"]
    holo.add_argument("--F", required=True, help="F(x, y); x is the leaf coordinate, y the transversal")
    holo.add_argument("--G", required=True, help="G(x, y) of the field F d/dx + y G d/dy")
    holo.add_argument("--center", type=complex, default=0j)
    holo.add_argument("--base", type=complex, default=1 + 0j)
    holo.add_argument("--winding", type=int, default=1)
    holo.add_argument("--jet-order", type=int, default=None)
    holo.add_argument("--ramification", type=int, default=None)
    holo.add_argument("--tol", type=float, default=1e-6)
    subs["rigidity"].add_argument("--poly", action="append", required=True)
    subs["catalog"].add_argument("action", choices=["list", "run"])
    subs["catalog"].add_argument("scenario", nargs="?")
    subs["catalog"].add_argument("--n", type=int, default=None)
    subs["catalog"].add_argument("--d", type=int, default=None)
    return parser


def _context(args: argparse.Namespace) -> Context:
    config = get_config()
    n = args.vars if args.vars is not None else config.default_vars
    order = args.order if args.order is not None else config.default_order
    if n < 1 or order < 1:
        raise UsageError("--vars and --order must be positive")
    return Context(n, order, field_from_spec(args.field))


def _error(exc: Exception) -> ErrorResponse:
    details: Dict[str, Any] = {}
    if hasattr(exc, "line"):
        details.update(line=getattr(exc, "line"), col=getattr(exc, "col"))
    code = getattr(exc, "code", "invalid_input")
    return ErrorResponse(error=code, message=str(exc), details=details or None)


def run(argv: Sequence[str]) -> Tuple[int, Union[CommandReport, ErrorResponse], bool]:
    """Execute one command; returns (exit code, report or error, whether JSON was requested)."""
    as_json = "--json" in argv
    try:
        args = build_parser().parse_args(list(argv))
        ctx = _context(args)
        logger.info("cli.command.start", command=args.command, field=ctx.field.spec(), n=ctx.n_vars, order=ctx.order)
        outcome = COMMANDS[args.command][1](args, ctx)
    except (GermCalcError, ValueError, ArithmeticError) as exc:
        logger.info("cli.command.failed", error=type(exc).__name__, message=str(exc))
        return 2, _error(exc), as_json
    report = CommandReport(
        command=args.command,
        ok=outcome.verdict is not False,
        verdict=outcome.verdict,
        field=ctx.field.spec(),
        n_vars=ctx.n_vars,
        order=ctx.order,
        warnings=outcome.warnings,
        result=outcome.result,
    )
    code = 0 if report.ok else 1
    logger.info("cli.command.finish", command=args.command, verdict=outcome.verdict, exit_code=code)
    return code, report, as_json


def _print_text(report: CommandReport) -> None:
    verdict = {True: "yes", False: "no", None: "-"}[report.verdict]
    print(f"{report.command}: verdict {verdict}")
    for key, value in report.result.model_dump(exclude_none=True).items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=False)
        print(f"  {key}: {value}")
    for warning in report.warnings:
        print(f"  warning: {warning}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    code, report, as_json = run(sys.argv[1:] if argv is None else argv)
    if isinstance(report, ErrorResponse):
        if as_json:
            print(report.model_dump_json(indent=2, exclude={"timestamp"}))
        else:
            print(f"error: {report.message}", file=sys.stderr)
        return code
    if as_json:
        print(report.model_dump_json(indent=2))
    else:
        _print_text(report)
    return code


if __name__ == "__main__":
    sys.exit(main())

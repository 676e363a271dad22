"""
Point blow-up in the chart Pi(x, t) = (x, x t_2, ..., x t_n), strict transforms,
the exceptional residue alpha, and normal forms of one-variable meromorphic
1-forms on a transversal.

Chart jets are built with total order 2N so that f o Pi is exact for
polynomial input of degree <= N; the meaningful precision is x-adic and equals N.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Literal, Optional, Tuple, Union

from src.calculus import DiffeoJet, PForm, VectorField, closedness_residual, exterior_d, pullback_map
from src.coeff import Scalar, nth_root
from src.errors import BranchMatchError, GermCalcError, JetError, NotInCentralizerError
from src.germdiff import formal_flow
from src.jets import Jet, jet_exp, jet_log, jet_nth_root, jet_unit_inverse
from src.logforms import Branch, LogForm, alpha_from_valuations, clear_denominators
from src.logging_config import get_structured_logger

logger = get_structured_logger(__name__)

__all__ = [
    "BlowupResult",
    "NormalForm1D",
    "CentralizerVerdict",
    "alpha_from_valuations",
    "blowup_pullback",
    "chart_map",
    "centralizer_classify",
    "normal_form_1d",
]


# ============================================================================
# Chart
# ============================================================================

def chart_map(n_vars: int, field, order: int) -> List[Jet]:
    """Components of Pi at total order `order`."""
    x = Jet.variable(field, n_vars, order, 0)
    return [x] + [x * Jet.variable(field, n_vars, order, j) for j in range(1, n_vars)]


def _x_valuation(f: Jet) -> int:
    exps = [e[0] for e, _ in f.terms()]
    if not exps:
        raise BranchMatchError("branch is identically zero in the chart")
    return min(exps)


def _strict(f: Jet, k: int) -> Jet:
    return f.divide_by_monomial((k,) + (0,) * (f.n_vars - 1)).with_order(f.order)


@dataclass(frozen=True)
class BlowupResult:
    pulled: PForm
    multiplicities: Tuple[int, ...]
    stricts: Tuple[Jet, ...]
    precision: int
    alpha: Optional[Scalar] = None
    chart_log_form: Optional[LogForm] = None
    shape_residual: Optional[PForm] = None
    closedness: Optional[PForm] = None

    @property
    def closed(self) -> Optional[bool]:
        return None if self.closedness is None else self.closedness.is_zero()


def blowup_pullback(source: Union[LogForm, PForm, Jet]) -> BlowupResult:
    """Pull a logarithmic form, a holomorphic form or a function into the chart."""
    n = source.n_vars
    if n < 2:
        raise GermCalcError("blow-up needs at least two variables")
    precision = source.order
    chart_order = 2 * precision
    field = source.field
    pi = chart_map(n, field, chart_order)

    if isinstance(source, Jet):
        lifted = source.with_order(chart_order).compose(pi)
        k = _x_valuation(lifted)
        strict = _strict(lifted, k)
        logger.info("blowup.function", multiplicity=k)
        return BlowupResult(PForm.function(lifted), (k,), (strict,), precision)

    if isinstance(source, PForm):
        pulled = pullback_map(pi, _lift_form(source, chart_order))
        exps = [e[0] for _, jet in pulled.items() for e, _ in jet.terms()]
        k = min(exps) if exps else 0
        closed = exterior_d(pulled) if source.degree < n and exterior_d(source).is_zero() else None
        logger.info("blowup.form", multiplicity=k, degree=source.degree)
        return BlowupResult(pulled, (k,), (), precision, closedness=closed)

    return _blowup_log_form(source, pi, chart_order, precision)


def _lift_form(form: PForm, order: int) -> PForm:
    return PForm(form.field, form.n_vars, form.degree, order, {i: j.with_order(order) for i, j in form.items()})


def _blowup_log_form(source: LogForm, pi: List[Jet], chart_order: int, precision: int) -> BlowupResult:
    field, n = source.field, source.n_vars
    lifted_fs = [b.f.with_order(chart_order).compose(pi) for b in source.branches]
    ks = tuple(_x_valuation(f) for f in lifted_fs)
    stricts = tuple(_strict(f, k) for f, k in zip(lifted_fs, ks))
    alpha = field.zero()
    for k, b in zip(ks, source.branches):
        alpha = alpha + b.residue * k
    excess = sum(k * b.excess for k, b in zip(ks, source.branches))
    x = Jet.variable(field, n, chart_order, 0)
    numerator = source.numerator.with_order(chart_order).compose(pi)
    chart = LogForm(
        (Branch(alpha, x, excess),)
        + tuple(Branch(b.residue, s, b.excess) for b, s in zip(source.branches, stricts)),
        numerator,
        check_units=False,
    )

    lifted = LogForm(
        tuple(Branch(b.residue, b.f.with_order(chart_order), b.excess) for b in source.branches),
        source.numerator.with_order(chart_order),
        check_units=source.check_units,
    )
    holomorphic = clear_denominators(lifted)
    pulled = pullback_map(pi, holomorphic)
    denominator = Jet.constant(field, n, chart_order, 1)
    for f, b in zip(lifted_fs, source.branches):
        denominator = denominator * f ** (b.excess + 1)
    closedness = closedness_residual(pulled, denominator.truncate(pulled.order))

    chart_clear = clear_denominators(chart)
    chart_denominator = x ** (excess + 1)
    for s, b in zip(stricts, source.branches):
        chart_denominator = chart_denominator * s ** (b.excess + 1)
    order = min(pulled.order, chart_clear.order)
    shape = pulled.truncate(order).multiply(chart_denominator.truncate(order)) - chart_clear.truncate(order).multiply(
        denominator.truncate(order)
    )
    logger.info("blowup.log_form", multiplicities=list(ks), alpha=alpha.to_text())
    return BlowupResult(pulled, ks, stricts, precision, alpha, chart, shape, closedness)


# ============================================================================
# One-variable normal forms
# ============================================================================

Kind = Literal["regular", "simple_pole", "higher_pole"]


@dataclass(frozen=True)
class NormalForm1D:
    """phi(x) dx = v(x) / x^l dx brought to one of three models by x_hat = change(x)."""

    kind: Kind
    pole_order: int
    change: Jet
    residual: Jet
    m: Optional[int] = None
    residue: Optional[Scalar] = None

    def model_text(self) -> str:
        if self.kind == "regular":
            return f"x^{self.m} dx"
        if self.kind == "simple_pole":
            return f"{self.residue.to_dsl()}/x dx"  # type: ignore[union-attr]
        return f"(1 + {self.residue.to_dsl()}*x^{self.pole_order - 1})/x^{self.pole_order} dx"  # type: ignore[union-attr]


def _antiderivative(f: Jet) -> Jet:
    terms = {(e[0] + 1,): c / (e[0] + 1) for e, c in f.terms()}
    return Jet(f.field, 1, f.order + 1, terms)


def _x(v: Jet, order: Optional[int] = None) -> Jet:
    return Jet.variable(v.field, 1, v.order if order is None else order, 0)


def normal_form_1d(pole_order: int, v: Jet) -> NormalForm1D:
    """Classify v(x)/x^l dx into the regular, simple-pole or higher-pole model."""
    if v.n_vars != 1:
        raise GermCalcError("normal_form_1d works in one variable")
    if pole_order < 0:
        raise GermCalcError("pole order must be non-negative")
    if pole_order == 0:
        return _regular(v)
    v0 = v.constant_term()
    if v0.is_zero():
        raise JetError("normal_form_1d needs v(0) != 0 for a pole")
    if pole_order == 1:
        return _simple_pole(v)
    return _higher_pole(pole_order, v)


def _regular(v: Jet) -> NormalForm1D:
    m = v.valuation()
    if m is None:
        raise JetError("the zero form has no normal form")
    order = v.order
    if m >= order:
        raise JetError(f"vanishing order {m} leaves nothing to normalize at order {order}")
    w = _antiderivative(v).truncate(order).divide_by_monomial((m + 1,))
    u = jet_nth_root(w.scale(m + 1), m + 1)
    change = _x(v, u.order + 1) * u.with_order(u.order + 1)
    deriv = change.derivative(0)
    residual = change.truncate(deriv.order) ** m * deriv - v.truncate(deriv.order)
    return NormalForm1D("regular", 0, change, residual, m=m)


def _simple_pole(v: Jet) -> NormalForm1D:
    lam = v.constant_term()
    order = v.order
    psi = _antiderivative((v - lam).divide_by_monomial((1,)))
    psi = psi.truncate(order)
    unit = jet_exp(psi.scale(lam.inverse()))
    change = _x(v) * unit
    deriv = change.derivative(0)
    e = unit.truncate(deriv.order)
    residual = deriv.scale(lam) * jet_unit_inverse(e) - v.truncate(deriv.order)
    return NormalForm1D("simple_pole", 1, change, residual, residue=lam)


def _higher_pole(ell: int, v: Jet) -> NormalForm1D:
    order = v.order
    field = v.field
    v0 = v.constant_term()
    lam = v.coefficient((ell - 1,))
    q_terms = {}
    for (k,), a in v.terms():
        if k == ell - 1:
            continue
        q_terms[(k,)] = a * Fraction(1 - ell, k - ell + 1)
    q = Jet(field, 1, order, q_terms)
    x_pow = _x(v) ** (ell - 1)
    e_big = q
    for _ in range(order + 1):
        e_big = q - (x_pow * jet_log(e_big.scale(v0.inverse()))).scale(lam)
    c = nth_root(v0.inverse(), ell - 1)
    if c is None:
        raise JetError(f"1/v(0) has no {ell - 1}-th root in {field.spec()}")
    unit = jet_exp(jet_log(e_big.scale(v0.inverse())).scale(Fraction(-1, ell - 1))).scale(c)
    change = _x(v) * unit
    deriv = change.derivative(0)
    e = unit.truncate(deriv.order)
    model = 1 + change.truncate(deriv.order) ** (ell - 1) * lam
    residual = model * deriv * jet_unit_inverse(e) ** ell - v.truncate(deriv.order)
    return NormalForm1D("higher_pole", ell, change, residual, residue=lam)


# ============================================================================
# Centralizers
# ============================================================================

@dataclass(frozen=True)
class CentralizerVerdict:
    kind: Kind
    delta: Optional[Scalar] = None
    rho: Optional[Scalar] = None
    t: Optional[Scalar] = None


def _model_field(form: NormalForm1D, order: int, field) -> VectorField:
    """Z = x^l / (1 + lambda x^(l-1)) d/dx."""
    x = Jet.variable(field, 1, order, 0)
    ell = form.pole_order
    denom = 1 + (x ** (ell - 1)).scale(form.residue)
    return VectorField([x**ell * jet_unit_inverse(denom)])


def centralizer_classify(form: NormalForm1D, h: DiffeoJet) -> CentralizerVerdict:
    """Decide h^*(model) = model and return the shape of h."""
    if h.n_vars != 1:
        raise GermCalcError("centralizer_classify works in one variable")
    comp = h.components[0]
    field = comp.field
    deriv = comp.derivative(0)
    order = deriv.order
    hc = comp.truncate(order)
    x = Jet.variable(field, 1, order, 0)
    delta = comp.coefficient((1,))
    if form.kind == "regular":
        m = form.m or 0
        residual = hc**m * deriv - x**m
    elif form.kind == "simple_pole":
        residual = x * deriv - hc
    else:
        ell, lam = form.pole_order, form.residue
        residual = (x**ell) * (1 + (hc ** (ell - 1)).scale(lam)) * deriv - (hc**ell) * (1 + (x ** (ell - 1)).scale(lam))
    if not residual.is_zero():
        raise NotInCentralizerError("h does not preserve the model form", residual)

    linear = comp.homogeneous_part(1)
    if form.kind == "regular":
        m = form.m or 0
        if comp != linear or not (delta ** (m + 1)).is_one():
            raise NotInCentralizerError("h is not a rotation of order dividing m+1", comp - linear)
        return CentralizerVerdict("regular", delta=delta)
    if form.kind == "simple_pole":
        if comp != linear:
            raise NotInCentralizerError("h is not linear", comp - linear)
        return CentralizerVerdict("simple_pole", rho=delta)
    ell = form.pole_order
    if not (delta ** (ell - 1)).is_one():
        raise NotInCentralizerError(f"h'(0) is not an {ell - 1}-th root of unity", residual)
    rotated = comp.scale(delta.inverse())
    t = rotated.coefficient((ell,))
    flow = formal_flow(_model_field(form, comp.order, field)).evaluate(t)
    expected = flow.components[0].scale(delta)
    if comp != expected:
        raise NotInCentralizerError("h is not delta exp(tZ)", comp - expected)
    logger.info("blowup.centralizer", kind=form.kind, t=t.to_text())
    return CentralizerVerdict("higher_pole", delta=delta, t=t)

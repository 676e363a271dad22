"""
Tests for the blow-up chart, one-variable normal forms and their centralizers.
"""

import pytest

from src.blowup import blowup_pullback, centralizer_classify, chart_map, normal_form_1d
from src.calculus import DiffeoJet, PForm, exterior_d
from src.coeff import GAUSSIAN
from src.errors import GermCalcError, JetError, NotInCentralizerError
from src.jets import Ambient, jet_exp, jet_unit_inverse
from src.logforms import LogForm


pytestmark = pytest.mark.unit

PLANE = Ambient(GAUSSIAN, 2, 4)
LINE = Ambient(GAUSSIAN, 1, 6)


def chart_variables(result):
    """(x, t) in the chart ambient of a blow-up result."""
    order = result.pulled.order
    return Ambient(GAUSSIAN, 2, order).variables()


def test_chart_map():
    x, t = Ambient(GAUSSIAN, 2, 8).variables()
    assert chart_map(2, GAUSSIAN, 8) == [x, x * t]


def test_function_strict_transform():
    """y^2 - x^3 becomes x^2 (t^2 - x)."""
    x, y = PLANE.variables()
    result = blowup_pullback(y * y - x**3)
    cx, ct = chart_variables(result)
    assert result.multiplicities == (2,)
    assert result.stricts[0] == ct * ct - cx
    assert result.precision == PLANE.order


def test_function_strict_transform_is_unit():
    x, y = PLANE.variables()
    result = blowup_pullback(x * x + y**3)
    cx, ct = chart_variables(result)
    assert result.multiplicities == (2,)
    assert result.stricts[0] == 1 + cx * ct**3


def test_logarithmic_pullback():
    """dx/x + 3 dy/y has exceptional residue 1 + 3 and pulls back to a closed form."""
    x, y = PLANE.variables()
    result = blowup_pullback(LogForm.logarithmic([(1, x), (3, y)]))
    assert result.multiplicities == (1, 1)
    assert result.alpha == 4
    assert result.closed
    assert result.shape_residual.is_zero()


def test_cusp_residue():
    """A residue-2 cusp branch contributes 2 * 2 to alpha."""
    x, y = PLANE.variables()
    result = blowup_pullback(LogForm.logarithmic([(2, y * y - x**3)]))
    cx, ct = chart_variables(result)
    assert result.multiplicities == (2,)
    assert result.alpha == 4
    assert result.stricts[0] == ct * ct - cx
    assert result.closed
    assert result.shape_residual.is_zero()


def test_chart_log_form_has_exceptional_branch():
    x, y = PLANE.variables()
    result = blowup_pullback(LogForm.logarithmic([(1, x), (3, y)]))
    chart = result.chart_log_form
    assert chart.residues[0] == 4
    assert not chart.check_units
    assert len(chart.branches) == 3


def test_holomorphic_form_pullback():
    """x dy - y dx becomes x^2 dt."""
    x, y = PLANE.variables()
    result = blowup_pullback(PForm.one_form([-y, x]))
    cx, _ = chart_variables(result)
    assert result.multiplicities == (2,)
    assert result.pulled.component((1,)) == cx * cx
    assert result.pulled.component((0,)).is_zero()
    assert result.closed is None


def test_closed_form_stays_closed():
    x, y = PLANE.variables()
    result = blowup_pullback(exterior_d(PForm.function(x * y)))
    assert result.multiplicities == (1,)
    assert result.closed


def test_blowup_needs_two_variables():
    with pytest.raises(GermCalcError):
        blowup_pullback(LINE.var(0))


# ============================================================================
# One-variable normal forms
# ============================================================================

def test_regular_normal_form():
    """(1 + x) dx = d(x + x^2/2)."""
    x = LINE.var(0)
    form = normal_form_1d(0, 1 + x)
    assert form.kind == "regular"
    assert form.m == 0
    assert form.change == x + (x * x).scale(GAUSSIAN.coerce(1) / 2)
    assert form.residual.is_zero()
    assert form.model_text() == "x^0 dx"


def test_regular_normal_form_with_zero():
    x = LINE.var(0)
    form = normal_form_1d(0, x + x**3)
    assert form.m == 1
    assert form.residual.is_zero()


def test_simple_pole_normal_form():
    """(3 + 3x)/x dx = 3 dx_hat/x_hat with x_hat = x e^x."""
    x = LINE.var(0)
    form = normal_form_1d(1, 3 + x.scale(3))
    assert form.kind == "simple_pole"
    assert form.residue == 3
    assert form.change == x * jet_exp(x)
    assert form.residual.is_zero()
    assert form.model_text() == "3/x dx"


@pytest.mark.parametrize(
    "pole_order,v",
    [
        (2, lambda x: 1 + x + x * x),
        (2, lambda x: 4 + x**3),
        (3, lambda x: 1 + x.scale(2) + x**2),
    ],
)
def test_higher_pole_normal_form(pole_order, v):
    x = LINE.var(0)
    form = normal_form_1d(pole_order, v(x))
    assert form.kind == "higher_pole"
    assert form.pole_order == pole_order
    assert form.residual.is_zero()


def test_double_pole_without_residue():
    x = LINE.var(0)
    form = normal_form_1d(2, LINE.one())
    assert form.change == x
    assert form.residue == 0


def test_normal_form_preconditions():
    x = LINE.var(0)
    with pytest.raises(JetError):
        normal_form_1d(2, x)
    with pytest.raises(GermCalcError):
        normal_form_1d(-1, LINE.one())
    with pytest.raises(GermCalcError):
        normal_form_1d(0, PLANE.one())


# ============================================================================
# Centralizers
# ============================================================================

def test_regular_centralizer_is_rotation():
    x = LINE.var(0)
    verdict = centralizer_classify(normal_form_1d(0, x), DiffeoJet([-x]))
    assert verdict.kind == "regular"
    assert verdict.delta == -1


def test_simple_pole_centralizer_is_linear():
    x = LINE.var(0)
    verdict = centralizer_classify(normal_form_1d(1, LINE.one()), DiffeoJet([x.scale(5)]))
    assert verdict.kind == "simple_pole"
    assert verdict.rho == 5


def test_higher_pole_centralizer_is_flow():
    """x / (1 - x) is the time-one flow of x^2 d/dx."""
    x = LINE.var(0)
    h = DiffeoJet([x * jet_unit_inverse(1 - x)])
    verdict = centralizer_classify(normal_form_1d(2, LINE.one()), h)
    assert verdict.kind == "higher_pole"
    assert verdict.delta == 1
    assert verdict.t == 1


def test_not_in_centralizer():
    x = LINE.var(0)
    with pytest.raises(NotInCentralizerError):
        centralizer_classify(normal_form_1d(1, LINE.one()), DiffeoJet([x + x * x]))

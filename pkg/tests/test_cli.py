"""
Tests for the command-line surface: exit codes, reports and JSON output.
"""

import json

import pytest

from src.cli import COMMANDS, build_parser, main, run
from src.errors import UsageError
from src.models import CommandReport, ErrorResponse


pytestmark = pytest.mark.integration

DELTA_FORM = "logform{ dlog(x) + zeta3*dlog(y) + zeta3^2*dlog(z) }"


def run_ok(*argv):
    code, report, _ = run(list(argv))
    assert isinstance(report, CommandReport), report
    return code, report


# ============================================================================
# Exit codes and verdicts
# ============================================================================

def test_non_integrable_form_exits_one():
    """A negative verdict is a report with exit code 1, not an error."""
    code, report = run_ok("check-integrable", "--vars", "3", "--form", "z*dx + x*dy + y*dz")
    assert code == 1
    assert report.verdict is False
    assert not report.result.integrable
    assert report.result.residuals


def test_integrable_form_exits_zero():
    code, report = run_ok("check-integrable", "--form", "y*dx + 2*x*dy")
    assert code == 0
    assert report.result.integrable


def test_iso_cyclic_shift_cofactor():
    """The cyclic shift multiplies the form by zeta3."""
    code, report = run_ok(
        "iso", "--vars", "3", "--field", "cyclotomic:3", "--form", DELTA_FORM, "--map", "[z, x, y]"
    )
    assert code == 0
    assert report.result.member
    assert report.result.cofactor_constant.text == "(zeta3)"
    assert report.field == "cyclotomic:3"


def test_iso_with_fix_decision():
    code, report = run_ok("iso", "--form", "x*dy - y*dx", "--map", "[2*x, 2*y]", "--fix")
    assert report.result.member
    assert report.result.fix.status == "yes"
    assert code == 0


def test_fix_non_scalar_isotropy_exits_one():
    code, report = run_ok("fix", "--form", "x*dy - y*dx", "--map", "[2*x, 3*y]")
    assert code == 1
    assert report.result.status == "no"


def test_fix_outside_iso_is_an_error():
    code, report, _ = run(["fix", "--form", "dx", "--map", "[y, x]"])
    assert code == 2
    assert report.error == "not_in_iso"


def test_residues_with_action():
    """The shift permutes the branches in one 3-cycle."""
    code, report = run_ok(
        "residues", "--vars", "3", "--field", "cyclotomic:3", "--logform", DELTA_FORM, "--map", "[z, x, y]"
    )
    assert code == 0
    assert report.result.permutation == [2, 3, 1]
    assert report.result.cycle_length == 3
    assert report.result.first_integral == "none"


def test_flow_report():
    code, report = run_ok("flow", "--vector-field", "field[y, 0]", "--t", "2")
    assert code == 0
    assert report.verdict is None
    assert report.result.t_degree == 1
    assert report.result.evaluated.text == "[x + 2*y, y]"


def test_jordan_report():
    code, report = run_ok("jordan", "--order", "4", "--map", "[4*x + y^2, 2*y]")
    assert code == 0
    assert report.result.residual_zero
    assert report.result.commute
    assert len(report.result.resonant_terms) == 1


def test_blowup_report():
    code, report = run_ok("blowup", "--order", "3", "--form", "logform{ dlog(x) + 3*dlog(y) }")
    assert code == 0
    assert report.result.alpha.text == "4"
    assert report.result.closed


def test_normal_form_with_centralizer():
    code, report = run_ok("normal1d", "--pole-order", "1", "--v", "3 + 3*x", "--centralizer", "[5*x]")
    assert code == 0
    assert report.result.kind == "simple_pole"
    assert report.result.centralizer.rho.text == "5"


def test_normal_form_outside_centralizer():
    code, report = run_ok("normal1d", "--pole-order", "1", "--v", "1", "--centralizer", "[x + x^2]")
    assert code == 1
    assert not report.result.centralizer.preserves


def test_rigidity_report():
    code, report = run_ok("rigidity", "--poly", "x", "--poly", "y", "--poly", "x + y")
    assert code == 0
    assert report.result.dimension == 1


def test_catalog_list():
    code, report = run_ok("catalog", "list")
    assert code == 0
    assert "jouanolou" in report.result.scenarios


@pytest.mark.slow
def test_holonomy_report():
    """Linear model with residue 1/2: the multiplier is exp(i pi)."""
    code, report = run_ok("holonomy", "--F", "x", "--G", "1/2", "--base", "0.5")
    assert code == 0
    real, imag = report.result.multiplier
    assert real == pytest.approx(-1.0, abs=1e-8)
    assert imag == pytest.approx(0.0, abs=1e-8)


# ============================================================================
# Usage errors
# ============================================================================

@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["no-such-command"],
        ["check-integrable"],
        ["check-integrable", "--vars", "0", "--form", "dx"],
        ["check-integrable", "--field", "cyclotomic:0", "--form", "dx"],
        ["iso", "--form", "dx", "--map", "x"],
        ["catalog", "run"],
        ["catalog", "run", "no-such-scenario"],
        ["blowup", "--form", "3"],
    ],
)
def test_usage_errors_exit_two(argv):
    code, report, _ = run(argv)
    assert code == 2
    assert isinstance(report, ErrorResponse)


@pytest.mark.parametrize(
    "argv",
    [
        ["intfactor", "--form", "y*dx + 2*x*dy", "--degree", "-1"],
        ["holonomy", "--F", "x", "--G", "1/2", "--ramification", "0"],
        ["holonomy", "--F", "x", "--G", "1/2", "--ramification", "-3"],
    ],
)
def test_out_of_range_bounds_are_usage_errors(argv):
    code, report, _ = run(argv)
    assert code == 2
    assert report.error == "usage"


def test_parse_error_carries_position():
    code, report, as_json = run(["check-integrable", "--form", "wedge(dx,", "--json"])
    assert code == 2
    assert as_json
    assert report.error == "parse_error"
    assert report.details == {"line": 1, "col": 10}


def test_every_command_has_a_subparser():
    """Unknown flags are usage errors for every subcommand."""
    parser = build_parser()
    for name in COMMANDS:
        with pytest.raises(UsageError):
            parser.parse_args([name, "--no-such-flag"])


# ============================================================================
# Output
# ============================================================================

def test_main_prints_json(capsys):
    code = main(["catalog", "run", "jouanolou", "--n", "2", "--d", "2", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["ok"]
    assert payload["result"]["data"]["D"] == 7
    assert payload["result"]["passed"]


def test_main_prints_text(capsys):
    code = main(["check-integrable", "--vars", "3", "--form", "z*dx + x*dy + y*dz"])
    out = capsys.readouterr().out
    assert code == 1
    assert out.startswith("check-integrable: verdict no")


def test_main_reports_errors_on_stderr(capsys):
    code = main(["check-integrable", "--form", "wedge(dx,"])
    captured = capsys.readouterr()
    assert code == 2
    assert "error: 1:10:" in captured.err
    assert captured.out == ""


def test_main_prints_json_errors(capsys):
    """JSON errors go to stdout so --json output stays parseable."""
    code = main(["rigidity", "--poly", "x + y^2", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert code == 2
    assert payload["error"] == "non_homogeneous"
    assert "timestamp" not in payload

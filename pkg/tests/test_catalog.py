"""
Tests for the scenario catalog.
"""

import pytest

from src.catalog import (
    SCENARIOS,
    Scenario,
    build_jouanolou,
    build_named,
    jouanolou_degree,
    list_scenarios,
    matrix_order,
    normal_form_words,
    projective_closure,
)
from src.coeff import GAUSSIAN
from src.errors import GermCalcError, UnknownScenarioError
from src.linalg import to_matrix


pytestmark = pytest.mark.integration


def test_list_scenarios():
    listed = dict(list_scenarios())
    assert set(listed) == set(SCENARIOS)
    assert "jouanolou" in listed
    assert all(listed.values())


@pytest.mark.parametrize("scenario_id", sorted(SCENARIOS))
def test_named_scenario_passes(scenario_id):
    scenario = build_named(scenario_id)
    failed = [fact.claim for fact in scenario.facts if fact.status == "fail"]
    assert not failed
    assert scenario.passed
    assert scenario.checked > 0


def test_unknown_scenario():
    with pytest.raises(UnknownScenarioError):
        build_named("no-such-scenario")


def test_scenario_counts_assumptions_separately():
    scenario = Scenario("demo", "bookkeeping")
    scenario.check("holds", True)
    scenario.assume("taken on faith")
    assert scenario.passed
    assert scenario.checked == 1
    scenario.check("broken", False, "detail")
    assert not scenario.passed


@pytest.mark.parametrize("n,d,expected", [(2, 2, 7), (2, 3, 13), (3, 2, 15)])
def test_jouanolou_degree(n, d, expected):
    assert jouanolou_degree(n, d) == expected


@pytest.mark.slow
def test_jouanolou_symmetry_group():
    scenario = build_jouanolou(2, 2)
    assert scenario.passed
    assert scenario.data["D"] == 7
    assert scenario.data["group_order"] == 21
    assert scenario.data["normal_form_count"] == 21


def test_jouanolou_preconditions():
    with pytest.raises(GermCalcError):
        build_jouanolou(1, 2)
    with pytest.raises(GermCalcError):
        build_jouanolou(2, 1)


def test_projective_closure_of_rotation():
    """The quarter turn has order 4, order 2 modulo scalars."""
    rotation = to_matrix(GAUSSIAN, [[0, -1], [1, 0]])
    assert matrix_order(rotation, 10) == 4
    assert projective_closure([rotation]) == 2


def test_projective_closure_bound():
    shear = to_matrix(GAUSSIAN, [[1, 1], [0, 1]])
    assert projective_closure([shear], bound=5) is None


def test_normal_form_words_of_dihedral_pair():
    """A quarter turn and a reflection give four classes modulo scalars."""
    rotation = to_matrix(GAUSSIAN, [[0, -1], [1, 0]])
    reflection = to_matrix(GAUSSIAN, [[1, 0], [0, -1]])
    assert normal_form_words(rotation, reflection, 2, 2) == projective_closure([rotation, reflection]) == 4


def test_normal_form_words_detects_missing_classes():
    rotation = to_matrix(GAUSSIAN, [[0, -1], [1, 0]])
    reflection = to_matrix(GAUSSIAN, [[1, 0], [0, -1]])
    assert normal_form_words(rotation, reflection, 1, 1) is None


@pytest.mark.slow
def test_jouanolou_group_order_cross_check():
    scenario = build_jouanolou(2, 3)
    assert scenario.passed
    assert scenario.data["D"] == 13
    assert scenario.data["group_order"] == scenario.data["normal_form_count"] == 39


def test_rigid_log_uses_branch_jets():
    scenario = build_named("rigid-log")
    assert scenario.passed
    assert scenario.objects["H2"] == "(x*y^2, x + y)"
    assert "dlog(x*y^2 + x^4 + y^4)" in scenario.objects["Omega_H2"]
    assert "dlog(x + y + x^2)" in scenario.objects["Omega_H2"]
    assert scenario.data["H1_dimension"] == scenario.data["H2_dimension"] == 1

"""Tests for response surfaces and method selection."""
import json
from pathlib import Path

import numpy as np
import pytest

from faircause.core import ObservationMatrix, SignSpec, VariableKind, VariableSpec, build_graph
from faircause.exceptions import ConfigError, RankError, SchemaError, UnknownNodeError
from faircause.inference import DmlConfig
from faircause.scm import do_sample, make_scm, sample
from faircause.selection import (
    ObjectiveTerm, PlanEvaluator, SelectionObjective, candidate_points, default_scales, fit_response,
    grid_levels, load_objective, select_methods,
)

TWO_METHODS = make_scm(["T1", "T2", "A", "B"], ["T1", "T2"], {("T1", "A"): 1.0, ("T2", "B"): 1.0}, noise_sigma=0.05)


def with_signs(data: ObservationMatrix, signs: dict) -> ObservationMatrix:
    """Same runs with the given sign specs on the named metrics."""
    specs = tuple(VariableSpec(s.name, s.kind, signs.get(s.name, s.sign)) for s in data.variables)
    return ObservationMatrix(specs, data.data)


def maximize(*metrics: str, weight: float = 1.0) -> SelectionObjective:
    return SelectionObjective(tuple(ObjectiveTerm(m, weight, SignSpec.maximize()) for m in metrics))


def test_grid_levels() -> None:
    assert grid_levels(0.25) == [0.25, 0.5, 0.75, 1.0]
    assert len(grid_levels(0.1)) == 10
    for step in (0.0, 0.6, -0.1):
        with pytest.raises(ConfigError):
            grid_levels(step)


def test_candidate_points_order() -> None:
    points = candidate_points(2, [0.5, 1.0], 1)
    np.testing.assert_array_equal(points, [[0, 0], [0.5, 0], [1, 0], [0, 0.5], [0, 1]])
    assert len(candidate_points(3, [0.5, 1.0], 2)) == 1 + 3 * 2 + 3 * 4


def test_null_response_has_insignificant_coefficients() -> None:
    scm = make_scm(["T1", "T2", "A"], ["T1", "T2"], {})
    surface = fit_response(sample(scm, 2000, seed=0), ["T1", "T2"], "A")
    assert surface.terms == ["const", "T1", "T2", "T1:T2"]
    for term, coef, se in zip(surface.terms[1:], surface.coef[1:], surface.bse[1:]):
        assert abs(coef) < 4 * se, term


def test_linear_response_coefficients() -> None:
    scm = make_scm(["T1", "T2", "A"], ["T1", "T2"], {("T1", "A"): 2.0, ("T2", "A"): -1.0}, noise_sigma=0.1)
    surface = fit_response(sample(scm, 2000, seed=1), ["T1", "T2"], "A")
    assert surface.coefficient("T1") == pytest.approx(2.0, abs=0.1)
    assert surface.coefficient("T2") == pytest.approx(-1.0, abs=0.1)
    assert surface.coefficient("T1:T2") == pytest.approx(0.0, abs=0.15)
    assert surface.predict({}) == pytest.approx(surface.coefficient("const"))
    assert surface.predict({"T1": 1.0}) - surface.predict({}) == pytest.approx(
        surface.coefficient("T1")
    )


def test_response_guards() -> None:
    data = sample(TWO_METHODS, 200, seed=2)
    with pytest.raises(ConfigError):
        fit_response(data, [], "A")
    with pytest.raises(ConfigError):
        fit_response(data, ["A"], "B")
    with pytest.raises(ConfigError):
        fit_response(data, ["T1"], "T2")
    surface = fit_response(data, ["T1"], "A")
    with pytest.raises(UnknownNodeError):
        surface.predict({"T2": 0.5})


def test_collinear_methods_raise_rank_error() -> None:
    t = np.random.default_rng(3).uniform(size=100)
    specs = (
        VariableSpec("T1", VariableKind.INTERVENTIONAL),
        VariableSpec("T2", VariableKind.INTERVENTIONAL),
        VariableSpec("A"),
    )
    data = ObservationMatrix(specs, np.column_stack([t, t, t + 1.0]))
    with pytest.raises(RankError):
        fit_response(data, ["T1", "T2"], "A")


@pytest.mark.parametrize("kwargs", [
    {"terms": ()},
    {"terms": (ObjectiveTerm("A", 0.0), ObjectiveTerm("B", 0.0))},
    {"terms": (ObjectiveTerm("A", 1.0), ObjectiveTerm("A", 2.0))},
    {"terms": (ObjectiveTerm("A", 1.0),), "scales": {"A": 0.0}},
])
def test_objective_guards(kwargs: dict) -> None:
    with pytest.raises(ConfigError):
        SelectionObjective(**kwargs)


def test_negative_weight_rejected() -> None:
    with pytest.raises(ConfigError):
        ObjectiveTerm("A", -1.0)


def test_single_improving_method_goes_all_in() -> None:
    scm = make_scm(["T", "A"], ["T"], {("T", "A"): 1.0})
    plan = select_methods(sample(scm, 1000, seed=4), scm.graph, maximize("A"), ["T"])
    assert plan.assignments == {"T": 1.0}
    assert plan.active == ["T"]
    assert plan.predicted_changes["A"] == pytest.approx(1.0, abs=0.1)
    assert plan.objective_value > 0


def test_targets_pick_interior_ratios() -> None:
    signs = {"A": SignSpec.towards(0.6), "B": SignSpec.towards(0.2)}
    data = with_signs(sample(TWO_METHODS, 2000, seed=5), signs)
    objective = SelectionObjective((ObjectiveTerm("A", 1.0, signs["A"]), ObjectiveTerm("B", 1.0, signs["B"])))
    plan = select_methods(data, TWO_METHODS.graph, objective, ["T1", "T2"], grid_step=0.1)
    assert plan.assignments["T1"] == pytest.approx(0.6, abs=0.1)
    assert plan.assignments["T2"] == pytest.approx(0.2, abs=0.1)

    clamped = do_sample(TWO_METHODS, plan.assignments, 20_000, seed=6)
    assert clamped.column("A").mean() == pytest.approx(0.6, abs=0.1)
    assert clamped.column("B").mean() == pytest.approx(0.2, abs=0.1)


def test_chosen_plan_is_the_grid_maximum() -> None:
    data = sample(TWO_METHODS, 1000, seed=7)
    objective = SelectionObjective((ObjectiveTerm("A", 1.0, SignSpec.maximize()), ObjectiveTerm("B", 0.5)))
    plan = select_methods(data, TWO_METHODS.graph, objective, ["T1", "T2"], grid_step=0.25)

    surfaces = {m: fit_response(data, ["T1", "T2"], m) for m in ("A", "B")}
    evaluator = PlanEvaluator(surfaces, objective, default_scales(data, ["A", "B"]))
    points = candidate_points(2, grid_levels(0.25), 2)
    assert plan.objective_value == pytest.approx(evaluator.values(points).max())
    assert evaluator.value(plan.assignments) == pytest.approx(plan.objective_value)


def test_default_scales_are_column_deviations() -> None:
    data = sample(TWO_METHODS, 500, seed=13)
    scales = default_scales(data, ["A", "B"])
    assert scales["A"] == pytest.approx(np.std(data.column("A"), ddof=1))
    flat = ObservationMatrix(data.variables, np.column_stack([data.data[:, :3], np.full(500, 2.0)]))
    assert default_scales(flat, ["B"]) == {"B": 1.0}


def test_concurrent_fits_give_the_same_plan() -> None:
    data = sample(TWO_METHODS, 1000, seed=14)
    objective = maximize("A", "B")
    plan = select_methods(data, TWO_METHODS.graph, objective, ["T1", "T2"])
    again = select_methods(data, TWO_METHODS.graph, objective, ["T1", "T2"], cfg=DmlConfig(n_jobs=3))
    assert again.to_dict() == plan.to_dict()


def test_max_active_limits_plan() -> None:
    data = sample(TWO_METHODS, 1000, seed=8)
    plan = select_methods(data, TWO_METHODS.graph, maximize("A", "B"), ["T1", "T2"], max_active=1)
    assert len(plan.active) == 1
    assert set(plan.assignments) == {"T1", "T2"}


def test_unreachable_methods_stay_off() -> None:
    scm = make_scm(["T1", "T2", "A"], ["T1", "T2"], {("T1", "A"): 1.0})
    plan = select_methods(sample(scm, 1000, seed=9), scm.graph, maximize("A"), ["T1", "T2"])
    assert plan.assignments == {"T1": 1.0, "T2": 0.0}


def test_no_searchable_method_gives_empty_plan() -> None:
    data = sample(make_scm(["T", "A"], ["T"], {}), 100, seed=10)
    plan = select_methods(data, build_graph(data.variables, []), maximize("A"), ["T"])
    assert plan.assignments == {"T": 0.0}
    assert plan.objective_value == 0.0


def test_selection_is_scale_invariant() -> None:
    scm = make_scm(["T1", "T2", "A", "B"], ["T1", "T2"], {("T1", "A"): 1.0, ("T1", "B"): -0.5, ("T2", "B"): 1.0})
    data = sample(scm, 2000, seed=11)
    scaled = ObservationMatrix(data.variables, data.data * np.array([1.0, 1.0, 100.0, 1.0]))
    plan = select_methods(data, scm.graph, maximize("A", "B"), ["T1", "T2"])
    again = select_methods(scaled, scm.graph, maximize("A", "B"), ["T1", "T2"])
    assert plan.assignments == again.assignments == {"T1": 1.0, "T2": 1.0}
    assert again.objective_value == pytest.approx(plan.objective_value)


def test_select_rejects_unknown_nodes() -> None:
    data = sample(TWO_METHODS, 200, seed=12)
    with pytest.raises(UnknownNodeError):
        select_methods(data, TWO_METHODS.graph, maximize("C"), ["T1"])


def test_load_objective_takes_signs_from_study(tmp_path: Path) -> None:
    specs = [VariableSpec("T", VariableKind.INTERVENTIONAL), VariableSpec("SPD", sign=SignSpec.towards(0.0))]
    path = tmp_path / "objective.json"
    path.write_text(json.dumps({"terms": [{"metric": "SPD", "weight": 2.0}], "scales": {"SPD": 0.5}}))
    objective = load_objective(path, specs)
    assert objective.terms == (ObjectiveTerm("SPD", 2.0, SignSpec.towards(0.0)),)
    assert objective.scales == {"SPD": 0.5}


@pytest.mark.parametrize("doc, error", [
    ({"terms": [{"metric": "Q", "weight": 1.0}]}, UnknownNodeError),
    ({"terms": [{"metric": "T", "weight": 1.0}]}, ConfigError),
    ({"terms": [{"metric": "SPD", "weight": 0.0}]}, ConfigError),
    ({"terms": [{"metric": "SPD"}]}, SchemaError),
    ({"weights": {}}, SchemaError),
])
def test_load_objective_errors_name_the_file(tmp_path: Path, doc: dict, error: type) -> None:
    specs = [VariableSpec("T", VariableKind.INTERVENTIONAL), VariableSpec("SPD")]
    path = tmp_path / "objective.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(error) as excinfo:
        load_objective(path, specs)
    assert excinfo.value.source == str(path)

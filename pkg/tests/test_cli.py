"""End-to-end tests of the faircause subcommands."""
import json
from pathlib import Path

import jsonschema
import pytest

from faircause.__main__ import run
from faircause.core import study_to_dict, write_run_table
from faircause.formatters import canonical_json
from faircause.scm import make_scm, sample
from faircause.settings import SCHEMA_DIR

SIMULATE = ["simulate", "--nodes", "5", "--interventional", "2", "--n", "1000"]


def validate(document: dict, schema: str) -> None:
    jsonschema.validate(document, json.loads((SCHEMA_DIR / f"{schema}.schema.json").read_text()))


def read_json(path: Path) -> dict:
    return json.loads(path.read_text())


@pytest.fixture
def simulated(tmp_path: Path) -> Path:
    assert run(["-q", "--seed", "3", "--out-dir", str(tmp_path), *SIMULATE]) == 0
    return tmp_path


@pytest.fixture
def common_ancestor_study(tmp_path: Path) -> Path:
    """Runs, study and graph of T -> M -> {X up, Y down}."""
    scm = make_scm(["T", "M", "X", "Y"], ["T"], {("T", "M"): 1.0, ("M", "X"): 1.0, ("M", "Y"): -1.0})
    data = sample(scm, 3000, seed=0)
    write_run_table(data, tmp_path / "runs.csv")
    (tmp_path / "study.json").write_text(canonical_json(study_to_dict(data.variables)))
    (tmp_path / "graph.json").write_text(canonical_json(scm.graph.to_dict()))
    return tmp_path


def data_args(d: Path, graph: str = "truth.json") -> list:
    return ["--data", str(d / "runs.csv"), "--config", str(d / "study.json"), "--graph", str(d / graph)]


def test_simulate_writes_valid_artifacts(simulated: Path) -> None:
    assert (simulated / "runs.csv").read_text().splitlines()[0].count(",") == 4
    validate(read_json(simulated / "truth.json"), "graph")
    validate(read_json(simulated / "study.json"), "study")
    validate(read_json(simulated / "scm.json"), "scm")


def test_simulate_is_deterministic(tmp_path: Path) -> None:
    for name in ("a", "b"):
        assert run(["-q", "--seed", "9", "--out-dir", str(tmp_path / name), *SIMULATE]) == 0
    for artifact in ("runs.csv", "truth.json", "study.json", "scm.json"):
        assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


def test_discover_then_compare(simulated: Path, capsys: pytest.CaptureFixture) -> None:
    d = simulated
    args = ["--data", str(d / "runs.csv"), "--config", str(d / "study.json")]
    assert run(["-q", "--out-dir", str(d), "discover", *args, "--restarts", "2",
                "--out", "learned.json", "--dot", "learned.dot"]) == 0
    learned = read_json(d / "learned.json")
    validate(learned, "graph")
    assert (d / "learned.dot").read_text().startswith("digraph G {")

    assert run(["-q", "compare", str(d / "learned.json"), str(d / "truth.json")]) == 0
    comparison = json.loads(capsys.readouterr().out)
    validate(comparison, "compare")
    assert comparison["edges_1"] == len(learned["edges"])
    assert comparison["consensus"]["n_graphs"] == 2

    graphs = [str(d / "learned.json"), str(d / "truth.json"), str(d / "learned.json")]
    assert run(["-q", "compare", *graphs]) == 0
    consensus = json.loads(capsys.readouterr().out)["consensus"]
    assert consensus["n_graphs"] == 3
    assert consensus["count"] == comparison["intersection"]
    assert consensus["jaccard"][0][2] == 1.0


def test_discover_is_deterministic_across_threads(simulated: Path) -> None:
    d = simulated
    args = ["--data", str(d / "runs.csv"), "--config", str(d / "study.json"), "--restarts", "3"]
    assert run(["-q", "--out-dir", str(d), "discover", *args, "--out", "one.json"]) == 0
    assert run(["-q", "--threads", "3", "--out-dir", str(d), "discover", *args, "--out", "many.json"]) == 0
    assert (d / "one.json").read_bytes() == (d / "many.json").read_bytes()


def test_discover_writes_tier_ablation(common_ancestor_study: Path) -> None:
    d = common_ancestor_study
    args = ["--data", str(d / "runs.csv"), "--config", str(d / "study.json"), "--restarts", "2"]
    out = ["--out", "learned.json", "--ablation", "ablation.json"]
    assert run(["-q", "--out-dir", str(d), "discover", *args, *out]) == 0
    ablation = read_json(d / "ablation.json")
    validate(ablation, "ablation")
    assert [v["variant"] for v in ablation["variants"]] == ["full", "without all"]
    assert [v["normalized"] for v in ablation["variants"]] == pytest.approx([1.0, 0.0])


def test_score_prints_json(simulated: Path, capsys: pytest.CaptureFixture) -> None:
    assert run(["-q", "score", *data_args(simulated)]) == 0
    validate(json.loads(capsys.readouterr().out), "score")


def test_ate_prints_effect(simulated: Path, capsys: pytest.CaptureFixture) -> None:
    assert run(["-q", "ate", *data_args(simulated), "--treatment", "T1", "--outcome", "X1", "--x2", "0.5"]) == 0
    effect = json.loads(capsys.readouterr().out)
    validate(effect, "effect")
    assert effect["ate"] == pytest.approx(0.5 * effect["theta"])
    assert effect["adjustment_set"] == []


def test_tradeoff_report(common_ancestor_study: Path) -> None:
    d = common_ancestor_study
    args = ["tradeoff", *data_args(d, "graph.json"), "--methods", "T", "--pairs", "X:Y"]
    out = ["--out", "report.json", "--dot", "report.dot", "--distribution", "causes.json"]
    assert run(["-q", "--out-dir", str(d), *args, *out]) == 0
    report = read_json(d / "report.json")
    validate(report, "report")
    assert report["pairs"][0]["count"] == 1
    assert report["pairs"][0]["confidence"] == {"M": 1.0}
    assert "fillcolor=red" in (d / "report.dot").read_text()
    causes = read_json(d / "causes.json")
    validate(causes, "distribution")
    assert (causes["by_node"], causes["total"]) == ({"M": 1}, 1)

    assert run(["-q", "--out-dir", str(d), *args, "--out", "again.json"]) == 0
    assert (d / "report.json").read_bytes() == (d / "again.json").read_bytes()


def test_tradeoff_on_simulated_runs(simulated: Path) -> None:
    args = ["tradeoff", *data_args(simulated), "--methods", "T1,T2", "--pairs", "X1:X2,X2:X3"]
    assert run(["-q", "--out-dir", str(simulated), *args, "--out", "report.json"]) == 0
    report = read_json(simulated / "report.json")
    validate(report, "report")
    assert [(p["x"], p["y"]) for p in report["pairs"]] == [("X1", "X2"), ("X2", "X3")]
    assert all(len(p["methods"]) == 2 for p in report["pairs"])


def test_select_plan(simulated: Path) -> None:
    objective = simulated / "objective.json"
    objective.write_text(json.dumps({"terms": [{"metric": "X1", "weight": 1.0}, {"metric": "X2", "weight": 1.0}]}))
    args = ["select", *data_args(simulated), "--objective", str(objective), "--grid-step", "0.25"]
    assert run(["-q", "--out-dir", str(simulated), *args, "--out", "plan.json"]) == 0
    plan = read_json(simulated / "plan.json")
    validate(plan, "plan")
    assert set(plan["assignments"]) == {"T1", "T2"}
    assert all(r in (0.0, 0.25, 0.5, 0.75, 1.0) for r in plan["assignments"].values())


def test_metrics_row(datadir: Path, capsys: pytest.CaptureFixture) -> None:
    assert run(["-q", "metrics", "--predictions", str(datadir / "predictions.csv"), "--k", "1"]) == 0
    header, values = capsys.readouterr().out.splitlines()
    assert header == "acc,f1,di,spd,aod,cons,ti"
    assert len(values.split(",")) == len(header.split(","))


@pytest.mark.parametrize("args", [
    ["score", "--config", "study.json", "--graph", "truth.json"],
    ["compare", "truth.json", "truth.json", "missing.json"],
    ["score", "--data", "missing.csv", "--config", "study.json", "--graph", "truth.json"],
    ["tradeoff", "--data", "runs.csv", "--config", "study.json", "--graph", "truth.json",
     "--methods", "T1", "--pairs", "X1", "--out", "r.json"],
    ["tradeoff", "--data", "runs.csv", "--config", "study.json", "--graph", "truth.json",
     "--methods", " , ", "--pairs", "X1:X2", "--out", "r.json"],
    ["tradeoff", "--data", "runs.csv", "--config", "study.json", "--graph", "truth.json",
     "--methods", "T1", "--pairs", "X1:X2", "--t-on", "0.5", "--t-off", "0.5", "--out", "r.json"],
    ["tradeoff", "--data", "runs.csv", "--config", "study.json", "--graph", "truth.json",
     "--methods", "T1", "--pairs", "X1:X2", "--t-on", "1.5", "--out", "r.json"],
    ["discover", "--data", "runs.csv", "--config", "study.json", "--max-in-degree", "-1", "--out", "g.json"],
    ["ate", "--data", "runs.csv", "--config", "study.json", "--graph", "truth.json",
     "--treatment", "X1", "--outcome", "X1"],
    ["ate", "--data", "runs.csv", "--config", "study.json", "--graph", "truth.json",
     "--treatment", "T1", "--outcome", "X1", "--x1", "nan"],
    ["select", "--data", "runs.csv", "--config", "study.json", "--graph", "truth.json",
     "--objective", "study.json", "--grid-step", "0.6"],
    ["simulate", "--nodes", "3", "--interventional", "3", "--n", "100"],
    ["simulate", "--nodes", "3", "--interventional", "1", "--n", "100", "--sigma", "0"],
])
def test_usage_errors_exit_1(simulated: Path, monkeypatch: pytest.MonkeyPatch, args: list) -> None:
    monkeypatch.chdir(simulated)
    assert run(["-q", *args]) == 1


def test_unknown_variable_exits_2(simulated: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(simulated)
    args = ["--data", "runs.csv", "--config", "study.json", "--graph", "truth.json"]
    assert run(["-q", "ate", *args, "--treatment", "Q", "--outcome", "X1"]) == 2


def test_data_error_names_the_file(
    datadir: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture
) -> None:
    monkeypatch.chdir(datadir)
    args = ["--data", "bad_runs.csv", "--config", "study.json"]
    assert run(["-q", "discover", *args, "--out", "learned.json"]) == 2
    assert "bad_runs.csv" in capsys.readouterr().err
    assert not (datadir / "learned.json").exists()

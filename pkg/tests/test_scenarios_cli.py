import copy
import json

import numpy as np
import pytest

from toricsim import cli
from toricsim.builtins import TABLE_ROWS, builtin, builtin_doc, list_builtins
from toricsim.scenarios import (
    SCHEMA,
    BackendError,
    Scenario,
    ScenarioError,
    export,
    run,
    run_many,
)

FAST = [n for n in list_builtins() if n != "vacuum_noisy"]


def test_builtin_inventory():
    names = list_builtins()
    assert len(TABLE_ROWS) == 18
    assert set(TABLE_ROWS) <= set(names)
    with pytest.raises(KeyError):
        builtin("nope")


@pytest.mark.parametrize("name", FAST)
def test_builtin_passes(name):
    report = run(builtin(name))
    failed = [c for c in report.data["checks"] if not c["passed"]]
    assert report.passed, failed


def test_noisy_builtin_passes():
    report = run(builtin("vacuum_noisy"))
    assert report.passed, [c for c in report.data["checks"] if not c["passed"]]
    assert set(report.results["uncertainties"]) >= {"V", "phi", "F", "P_HHHH"}


@pytest.mark.parametrize("name", TABLE_ROWS)
def test_engines_agree(name):
    report = run(builtin(name))
    assert report.results["plaquettes"]["agree"]
    assert all(report.results["cross_check"].values())


def test_stabilizer_only_backend():
    rep = run(builtin("e_q1"), backend="stabilizer")
    assert rep.passed and rep.data["backend"] == "stabilizer"
    assert "plaquettes" not in rep.results and "cross_check" not in rep.results
    for name in ("loop_empty", "braiding_minimal", "vacuum_noisy", "source_ghz"):
        with pytest.raises(BackendError):
            run(builtin(name), backend="stabilizer")


def test_failing_expectation_is_reported():
    doc = copy.deepcopy(builtin_doc("e_q1"))
    doc["expect"]["phase_pi"] = 0.0
    rep = run(doc)
    assert not rep.passed
    assert [c["name"] for c in rep.data["checks"] if not c["passed"]] == ["phase_pi"]


def _base():
    return {"schema": SCHEMA, "name": "t", "lattice": {"type": "minimal"}, "operations": []}


@pytest.mark.parametrize("patch", [
    {"schema": "other/1"},
    {"backend": "gpu"},
    {"bogus": 1},
    {"measurements": {"entropy": True}},
    {"operations": [{"op": "pauli", "pauli": "Z", "qubit": 9}]},
    {"operations": [{"op": "clifford", "gate": "T", "qubit": 1}]},
    {"operations": [{"op": "teleport"}]},
    {"lattice": {"type": "grid", "width": 3, "height": 3}, "measurements": {"correlation": True}},
    {"sampling": {"events_per_setting": 0}},
    {"noise": {"white": 3}},
    {"expect": {"unknown": 1}},
])
def test_schema_errors(patch):
    doc = {**_base(), **patch}
    with pytest.raises((ScenarioError, ValueError)):
        run(doc)


def test_missing_measurement_for_expectation():
    with pytest.raises(ScenarioError):
        run({**_base(), "expect": {"energy": -5}})


def test_scenario_round_trip():
    for name in list_builtins():
        sc = builtin(name)
        assert Scenario.from_json(json.dumps(sc.to_dict())) == sc


def test_reports_byte_identical():
    a = run(builtin("vacuum_noisy"), seed=99).to_json()
    b = run(builtin("vacuum_noisy"), seed=99).to_json()
    assert a == b
    c = run(builtin("vacuum_noisy"), seed=100).to_json()
    assert a != c


def test_run_many_keeps_order():
    scs = [builtin(n) for n in TABLE_ROWS]
    reports = run_many(scs, workers=4)
    assert [r.scenario for r in reports] == TABLE_ROWS
    serial = run_many(scs, workers=1)
    assert [r.to_json() for r in reports] == [r.to_json() for r in serial]


def test_csv_exports():
    files = export(run(builtin("vacuum_noisy")), "csv")
    assert files["vacuum_noisy_curve.csv"].splitlines()[0] == "gamma,value,stderr"
    assert files["vacuum_noisy_populations.csv"].splitlines()[0] == "outcome,probability"
    assert files["vacuum_noisy_counts.csv"].splitlines()[0] == "gamma,outcome_index,count"
    assert len(files["vacuum_noisy_curve.csv"].splitlines()) == 17
    with pytest.raises(ValueError):
        export(run(builtin("vacuum")), "xml")


def test_lattice_scenario_occupancy():
    rep = run(builtin("braiding_lattice_inside"))
    occ = rep.results["occupancy"]
    assert occ["e"] == [5, 8] and occ["m"] == []
    assert rep.results["energy"] == pytest.approx(-13)


def test_cli_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in list_builtins())


def test_cli_run_and_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cli.main(["run", "--builtin", "interference_q2", "--out", str(out)]) == 0
    assert "PASS" in capsys.readouterr().out
    assert json.loads(out.read_text())["passed"] is True
    doc = copy.deepcopy(builtin_doc("vacuum"))
    doc["expect"] = {"phase_pi": 1.0}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    assert cli.main(["run", str(path)]) == 1
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["run"]) == 2
    assert cli.main(["run", "--builtin", "loop_empty", "--backend", "stabilizer"]) == 2


def test_cli_export_and_show(tmp_path, capsys):
    assert cli.main(["export", "--builtin", "vacuum", "--format", "csv", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["vacuum_curve.csv", "vacuum_populations.csv"]
    assert cli.main(["export", "--builtin", "vacuum", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "vacuum.json").read_text())["scenario"] == "vacuum"
    capsys.readouterr()
    assert cli.main(["show", "--builtin", "alt_path"]) == 0
    assert json.loads(capsys.readouterr().out)["name"] == "alt_path"


def test_seed_recorded():
    assert run(builtin("vacuum_noisy")).data["seed"] == 2008
    assert run(builtin("vacuum")).data["seed"] is None
    curve = run(builtin("vacuum")).results["correlation"]["value"]
    assert np.allclose(curve, np.cos(4 * np.array(run(builtin("vacuum")).results["correlation"]["gamma"])))

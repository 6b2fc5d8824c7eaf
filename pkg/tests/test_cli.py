import filecmp
import json
import os
from pathlib import Path

import pytest
import yaml

from cli import main
from tasks.variational_tasks import DistanceTask
from service.experiment_service import EXIT_CONFIGURATION, EXIT_NUMERICAL, EXIT_PASS, ExperimentService
from utils.exceptions import SpecValidationError


@pytest.fixture(autouse=True)
def fresh_service():
    ExperimentService.reset()
    yield
    ExperimentService.reset()


BS_SPEC = {
    "measure": {"weight": {"name": "chord"}, "density": {"kind": "bernstein_szego", "alpha": [[0.5, 0.0]]},
                "grid": {"M": 1024}},
    "experiment": {"tasks": ["sumrule", "pointwise", "l2", "rakhmanov", "wave", "distance"], "n_max": 5, "seed": 3},
}


def write_spec(tmp_path, data, name="spec.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


def rejected_paths(tmp_path, data):
    with pytest.raises(SpecValidationError) as info:
        ExperimentService().validate_spec(write_spec(tmp_path, data))
    return info.value.field_paths


def test_validate_fills_defaults(tmp_path):
    config = ExperimentService().validate_spec(write_spec(tmp_path, {"measure": {"density": {"kind": "lebesgue"}}}))
    assert config.measure.grid.M == 4096
    assert config.measure.grid.offset == 0.5
    assert config.measure.weight.name == "chord"
    assert config.tasks == ["sumrule"]


def test_overrides_replace_spec_values(tmp_path):
    config = ExperimentService().validate_spec(write_spec(tmp_path, BS_SPEC),
                                               {"grid_m": 2048, "n_max": 7, "tasks": ["distance", "sumrule"]})
    assert config.measure.grid.M == 2048
    assert config.n_max == 7
    assert config.tasks == ["sumrule", "distance"]


def test_rejects_atom_mass_of_one(tmp_path):
    data = {"measure": {"density": {"kind": "lebesgue"}, "atoms": [{"angle": 1.0, "mass": 0.6},
                                                                 {"angle": 2.0, "mass": 0.4}]}}
    assert "measure.atoms" in rejected_paths(tmp_path, data)


def test_rejects_unknown_task(tmp_path):
    data = {"measure": {"density": {"kind": "lebesgue"}}, "experiment": {"tasks": ["foo"]}}
    assert "experiment.tasks" in rejected_paths(tmp_path, data)


def test_rejects_unknown_key(tmp_path):
    data = {"measure": {"density": {"kind": "lebesgue"}, "grid": {"M": 1024, "spacing": 2}}}
    assert "measure.grid.spacing" in rejected_paths(tmp_path, data)


def test_rejects_weight_zero_off_circle(tmp_path):
    data = {"measure": {"weight": {"zeros": [{"zeta": [0.5, 0.0]}]}, "density": {"kind": "lebesgue"}}}
    assert "measure.weight.zeros.0" in rejected_paths(tmp_path, data)


def test_rejects_grid_that_is_not_a_power_of_two(tmp_path):
    data = {"measure": {"density": {"kind": "lebesgue"}, "grid": {"M": 1000}}}
    assert "measure.grid.M" in rejected_paths(tmp_path, data)


def test_main_maps_bad_spec_to_configuration_exit(tmp_path):
    path = write_spec(tmp_path, {"measure": {"density": {"kind": "ps_family"}}})
    assert main(["validate", "--spec", path]) == EXIT_CONFIGURATION
    assert main(["validate", "--spec", str(tmp_path / "missing.yaml")]) == EXIT_CONFIGURATION


def test_run_bernstein_szego_passes(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--spec", write_spec(tmp_path, BS_SPEC), "--out", str(out)])
    assert code == EXIT_PASS
    for task in BS_SPEC["experiment"]["tasks"]:
        assert (out / f"{task}.tsv").exists()
    header = (out / "l2.tsv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "# seed=3 task=l2 M=1024 n_max=5"
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["exit_code"] == 0
    assert [o["task"] for o in summary["outcomes"]] == BS_SPEC["experiment"]["tasks"]


def test_reports_do_not_depend_on_worker_count(tmp_path):
    spec = write_spec(tmp_path, BS_SPEC)
    one, two = tmp_path / "one", tmp_path / "two"
    assert main(["run", "--spec", spec, "--out", str(one), "--workers", "1"]) == EXIT_PASS
    assert main(["run", "--spec", spec, "--out", str(two), "--workers", "2"]) == EXIT_PASS
    names = sorted(os.listdir(one))
    assert names == sorted(os.listdir(two))
    match, mismatch, errors = filecmp.cmpfiles(one, two, names, shallow=False)
    assert not mismatch and not errors


def test_measure_outside_class_is_numerical_failure(tmp_path):
    data = {"measure": {"density": {"kind": "ps_family", "beta": 3.5}, "grid": {"M": 1024}},
            "experiment": {"tasks": ["sumrule"], "n_max": 5}}
    out = tmp_path / "out"
    assert main(["run", "--spec", write_spec(tmp_path, data), "--out", str(out)]) == EXIT_NUMERICAL
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["outcomes"][0]["error_module"] == "measures"


def test_sweep_over_n_max(tmp_path):
    data = {**BS_SPEC, "experiment": {"tasks": ["sumrule", "distance"], "n_max": 2}}
    out = tmp_path / "sweep"
    code = main(["sweep", "--spec", write_spec(tmp_path, data), "--out", str(out), "--param", "n_max",
                 "--values", "2,4"])
    assert code == EXIT_PASS
    assert (out / "sweep_summary.tsv").exists()
    assert (out / "n_max=4" / "sumrule.tsv").exists()


def test_rakhmanov_on_lebesgue(tmp_path):
    data = {"measure": {"density": {"kind": "lebesgue"}, "grid": {"M": 1024}},
            "experiment": {"tasks": ["rakhmanov"], "n_max": 20}}
    out = tmp_path / "out"
    assert main(["run", "--spec", write_spec(tmp_path, data), "--out", str(out)]) == EXIT_PASS
    assert (out / "rakhmanov.tsv").exists()


def test_unexpected_task_error_is_reported(tmp_path, monkeypatch):
    def broken(self, context):
        raise RuntimeError("broken task")

    monkeypatch.setattr(DistanceTask, "compute", broken)
    out = tmp_path / "out"
    assert main(["run", "--spec", write_spec(tmp_path, BS_SPEC), "--out", str(out)]) == EXIT_NUMERICAL
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    outcomes = {o["task"]: o for o in summary["outcomes"]}
    assert outcomes["distance"]["status"] == "error"
    assert outcomes["distance"]["error_module"] == "variational"
    assert "broken task" in outcomes["distance"]["error"]
    assert outcomes["sumrule"]["status"] == "ok"
    assert (out / "sumrule.tsv").exists()


SPECS = sorted((Path(__file__).resolve().parent.parent / "specs").glob("*.yaml"))


@pytest.mark.parametrize("spec", SPECS, ids=[p.stem for p in SPECS])
def test_shipped_specs_pass_their_checks(tmp_path, spec):
    expected = EXIT_NUMERICAL if spec.stem == "ps_family_outside" else EXIT_PASS
    out = tmp_path / "out"
    assert main(["run", "--spec", str(spec), "--out", str(out)]) == expected
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    failed = [f"{o['task']}.{c['name']}" for o in summary["outcomes"] for c in o.get("checks", []) if not c["passed"]]
    assert not failed

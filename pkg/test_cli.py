"""
Tests for the command-line entry point and the scenario runner
"""

import json

import pytest

import main
from config import parse_scenario
from runner import ScenarioRunner

LIGHT_SCENARIO = """\
name: light-flat
pipeline: simulate
omega0: 1.0
spectral_density:
  kind: flat
  gamma0: 0.5
grid:
  dt: 0.01
  duration: 2.0
environment:
  beta: 1.0
initial_state:
  kind: coherent
  alpha: [0.5, 0.1]
"""


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "light.yaml"
    path.write_text(LIGHT_SCENARIO)
    return path


def test_validate_inputs(tmp_path, scenario_file):
    assert main.validate_inputs(str(scenario_file), 1)[0]
    assert not main.validate_inputs(str(tmp_path / "absent.yaml"), 1)[0]
    assert not main.validate_inputs(str(tmp_path), 1)[0]
    assert not main.validate_inputs(str(scenario_file), 0)[0]

    text_file = tmp_path / "scenario.txt"
    text_file.write_text(LIGHT_SCENARIO)
    assert not main.validate_inputs(str(text_file), 1)[0]


def test_missing_scenario_exits_with_config_error(tmp_path):
    code = main.main(["simulate", "--config", str(tmp_path / "absent.yaml"), "--out", str(tmp_path / "out")])
    assert code == main.EXIT_CONFIG


def test_invalid_schema_exits_with_config_error(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("spectral_density:\n  kind: flat\ngrid:\n  dt: 0.1\n  steps: 10\n")
    code = main.main(["simulate", "--config", str(path), "--out", str(tmp_path / "out")])
    assert code == main.EXIT_CONFIG


def test_sweep_without_parameter_exits_with_config_error(tmp_path, scenario_file):
    code = main.main(["sweep", "--config", str(scenario_file), "--out", str(tmp_path / "out")])
    assert code == main.EXIT_CONFIG


def test_simulate_writes_artifacts(tmp_path, scenario_file):
    out = tmp_path / "out"
    code = main.main(["simulate", "--config", str(scenario_file), "--out", str(out)])
    assert code == main.EXIT_OK

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["pipeline"] == "simulate"
    assert {"first_law", "heat_split", "ode_agreement", "work_vanishing",
            "random_state_entropy_production"} <= set(manifest["checks"])
    assert manifest["derived"]["random_states"]["count"] == 20
    assert all(check["passed"] for check in manifest["checks"].values())
    for name in manifest["artifacts"]:
        assert (out / name).exists()
    assert (out / "moments.csv").read_text().splitlines()[0] == "t,re_a,im_a,re_aa,im_aa,n,S"


def test_runner_records_failed_checks(tmp_path):
    config = parse_scenario(LIGHT_SCENARIO + "tolerances:\n  first_law: -1.0\n")
    manifest = ScenarioRunner(output_dir=str(tmp_path)).run(config)

    assert manifest["status"] == "checks_failed"
    assert not manifest["checks"]["first_law"]["passed"]
    assert any("first_law" in record["message"] for record in manifest["diagnostics"])


def test_runner_sweep_runs_every_point(tmp_path):
    config = parse_scenario(LIGHT_SCENARIO)
    manifest = ScenarioRunner(output_dir=str(tmp_path), workers=2).run_sweep(config, "beta", [0.5, 1.0])

    assert manifest["pipeline"] == "sweep"
    assert manifest["derived"]["failures"] == []
    assert (tmp_path / "sweep.csv").exists()


@pytest.mark.slow
def test_bundled_flat_scenario_passes(tmp_path):
    config = str(main.project_root / "data" / "scenarios" / "simulate_flat.yaml")
    assert main.main(["simulate", "--config", config, "--out", str(tmp_path)]) == main.EXIT_OK


LORENTZIAN_SCENARIO = """\
name: light-lorentzian
pipeline: simulate
spectral_density:
  kind: lorentzian
  gamma0: 0.2
  eta: 0.5
  omega_c: 0.8
grid:
  dt: 0.02
  duration: 10.0
environment:
  beta: 1.0
"""


def test_runner_checks_the_volterra_order(tmp_path):
    manifest = ScenarioRunner(output_dir=str(tmp_path)).run(parse_scenario(LORENTZIAN_SCENARIO))

    assert manifest["checks"]["convergence_order"]["passed"]
    assert abs(manifest["derived"]["volterra_convergence"]["order"] - 2.0) < 0.3
    assert manifest["checks"]["heat_split"]["passed"]


def test_solver_studies_can_be_switched_off(tmp_path):
    text = LORENTZIAN_SCENARIO + "solver:\n  convergence_check: false\n  random_states: 0\n"
    manifest = ScenarioRunner(output_dir=str(tmp_path)).run(parse_scenario(text))
    assert "convergence_order" not in manifest["checks"]

    flat = parse_scenario(LIGHT_SCENARIO + "solver:\n  random_states: 0\n")
    manifest = ScenarioRunner(output_dir=str(tmp_path / "flat")).run(flat)
    assert "random_state_entropy_production" not in manifest["checks"]

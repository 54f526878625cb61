"""Tests for the run configuration and argument parsing."""

import pytest

from harmonic_normality.cli import RunConfig, build_parser, resolve_run_config, run
from harmonic_normality.errors import InputError


def _resolve(config, *argv):
    return resolve_run_config(build_parser().parse_args(list(argv)), config)


def test_schedule_formula():
    rc = RunConfig(command="phi-check", rstart=0.1, rfactor=0.1, steps=3)
    assert rc.schedule() == pytest.approx([0.9, 0.99, 0.999])
    assert rc.effective()["schedule"] == rc.schedule()


def test_flags_override_config(config):
    rc = _resolve(config, "analyze", "--map", "m.map", "--phi", "inv_pow:alpha=2",
                  "--steps", "3", "--target", "0", "--target", "1+i")
    assert rc.weight == "inv_pow:alpha=2"
    assert rc.steps == 3
    assert rc.depth == config.default_depth
    assert rc.targets == ["0", "1+i"]
    assert rc.output_path == "report.json"


@pytest.mark.parametrize("argv", [
    ("analyze",),
    ("analyze", "--map", "m.map", "--rstart", "1.5"),
    ("analyze", "--map", "m.map", "--steps", "0"),
    ("analyze", "--map", "m.map", "--out", " "),
    ("field-export", "--map", "m.map", "--grid", "1"),
])
def test_invalid_runs_are_input_errors(config, argv):
    with pytest.raises(InputError, match="invalid run configuration"):
        _resolve(config, *argv)


def test_phi_check_needs_no_map(config):
    assert _resolve(config, "phi-check").map_path is None


def test_frozen():
    rc = RunConfig(command="phi-check")
    with pytest.raises(Exception):
        rc.steps = 2


def test_run_delegates_to_workflow(config, mocker):
    workflow = mocker.Mock()
    workflow.run.return_value = {"status": "success", "exit_code": 0}
    rc = RunConfig(command="phi-check")
    assert run(rc, config, workflow=workflow)["exit_code"] == 0
    workflow.run.assert_called_once_with(rc)


def test_schedule_defaults_come_from_config(config, mocker):
    mocker.patch.object(config, 'get_schedule_defaults', return_value={
        'r_start': 0.25, 'r_factor': 0.75, 'steps': 4, 'depth': 2})
    rc = _resolve(config, "analyze", "--map", "m.map", "--steps", "3")
    assert (rc.rstart, rc.rfactor, rc.steps, rc.depth) == (0.25, 0.75, 3, 2)

"""End-to-end tests for the analysis workflow and the command-line entry point."""

import pytest

from harmonic_normality.analysis.mapfn import HarmonicMap
from harmonic_normality.cli import RunConfig
from harmonic_normality.errors import SingularityError
from harmonic_normality.utils.report_storage import ReportStorage
from harmonic_normality.workflows.analysis_workflow import AnalysisWorkflow, field_rows
from main import main


@pytest.fixture
def workflow(config):
    return AnalysisWorkflow(config)


@pytest.fixture
def identity_file(tmp_path):
    path = tmp_path / "identity.map"
    path.write_text("h = z\ng = 0\n", encoding="utf-8")
    return path


def _run(workflow, **kwargs):
    return workflow.run(RunConfig(**kwargs))


class TestAnalyze:

    def test_identity_is_bounded(self, workflow, identity_file, tmp_path):
        out = tmp_path / "report.json"
        result = _run(workflow, command="analyze", map_path=str(identity_file), steps=4,
                      depth=2, output_path=str(out))
        assert result["status"] == "success"
        assert result["exit_code"] == 0
        assert result["summary"]["classification"] == "BoundedEvidence"
        report = ReportStorage(out).load_report()
        assert report["final_sup"] == pytest.approx(1.0, abs=1e-9)
        assert report["map"]["label"] == "identity"
        assert report["config"]["schedule"] == [0.5, 0.75, 0.875, 0.9375]
        trace = ReportStorage.read_csv(tmp_path / "report_trace.csv")
        assert trace[0] == ["radius", "value", "argmax_re", "argmax_im", "evaluations"]
        assert len(trace) == 5

    def test_reports_are_byte_identical(self, workflow, identity_file, tmp_path):
        out = tmp_path / "report.json"
        kwargs = dict(command="analyze", map_path=str(identity_file), steps=3, depth=2,
                      output_path=str(out))
        _run(workflow, **kwargs)
        first = out.read_bytes()
        _run(workflow, **kwargs)
        assert out.read_bytes() == first

    def test_witness_reports_are_byte_identical(self, workflow, tmp_path):
        path = tmp_path / "witness.map"
        path.write_text("h = exp(i/(1-z))\ng = 0\nsingularities = 1+0i\n", encoding="utf-8")
        out = tmp_path / "witness.json"
        kwargs = dict(command="analyze", map_path=str(path), weight="inv_pow:alpha=1.5",
                      rstart=0.1, rfactor=0.1, steps=4, depth=4, output_path=str(out))
        assert _run(workflow, **kwargs)["summary"]["classification"] == "GrowthEvidence"
        first = out.read_bytes()
        _run(workflow, **kwargs)
        assert out.read_bytes() == first

    def test_analysis_failure_exits_one(self, workflow, identity_file, tmp_path, mocker):
        mocker.patch(
            "harmonic_normality.workflows.analysis_workflow.classify_normality",
            side_effect=SingularityError(0.5 + 0j, 0.5 + 0j),
        )
        result = _run(workflow, command="analyze", map_path=str(identity_file), steps=2,
                      output_path=str(tmp_path / "report.json"))
        assert result["status"] == "error"
        assert result["exit_code"] == 1
        assert result["message"].startswith("Analysis:")
        assert not (tmp_path / "report.json").exists()


class TestInputErrors:

    def test_missing_g_exits_two(self, workflow, tmp_path):
        path = tmp_path / "broken.map"
        path.write_text("h = z\n", encoding="utf-8")
        result = _run(workflow, command="analyze", map_path=str(path),
                      output_path=str(tmp_path / "report.json"))
        assert result["exit_code"] == 2
        assert "'g ='" in result["message"]

    def test_preimages_need_targets(self, workflow, identity_file, tmp_path):
        result = _run(workflow, command="preimages", map_path=str(identity_file),
                      output_path=str(tmp_path / "report.json"))
        assert result["exit_code"] == 2

    def test_lappan_needs_four_or_five_targets(self, workflow, identity_file, tmp_path):
        result = _run(workflow, command="lappan", map_path=str(identity_file),
                      targets=["0", "1", "-1"], output_path=str(tmp_path / "report.json"))
        assert result["exit_code"] == 2
        assert "got 3" in result["message"]

    def test_bad_weight_exits_two(self, workflow, identity_file, tmp_path):
        result = _run(workflow, command="analyze", map_path=str(identity_file),
                      weight="inv_pow:alpha=1", output_path=str(tmp_path / "report.json"))
        assert result["exit_code"] == 2


class TestOtherCommands:

    def test_preimages(self, workflow, tmp_path):
        path = tmp_path / "affine.map"
        path.write_text("h = z\ng = 0.5*z\n", encoding="utf-8")
        out = tmp_path / "report.json"
        result = _run(workflow, command="preimages", map_path=str(path), targets=["1"],
                      output_path=str(out))
        assert result["summary"]["root_count"] == 1
        rows = ReportStorage.read_csv(tmp_path / "report_preimages.csv")
        assert len(rows) == 2
        assert float(rows[1][2]) == pytest.approx(2 / 3, abs=1e-9)

    def test_lappan_five(self, workflow, identity_file, tmp_path):
        out = tmp_path / "report.json"
        result = _run(workflow, command="lappan", map_path=str(identity_file), steps=3,
                      targets=["0", "1", "-1", "i", "-i"], output_path=str(out))
        assert result["summary"]["verdict"] == "BoundedEvidence"
        report = ReportStorage(out).load_report()
        assert report["criterion"]["mode"] == "five_point"
        assert report["criterion"]["overall"]["sup1"] == pytest.approx(1.0)

    def test_rescale(self, workflow, identity_file, tmp_path):
        out = tmp_path / "report.json"
        result = _run(workflow, command="rescale", map_path=str(identity_file),
                      weight="inv_pow:alpha=2", steps=3, depth=2, grid=9,
                      output_path=str(out))
        assert result["status"] == "success"
        assert result["summary"]["entries"] == 3
        report = ReportStorage(out).load_report()
        assert report["rescaled_at_origin"] == pytest.approx([1.0, 1.0, 1.0])
        assert "skipped" not in report["family"]

    def test_phi_check_without_map(self, workflow, tmp_path):
        out = tmp_path / "phi.json"
        result = _run(workflow, command="phi-check", weight="inv_pow:alpha=1.5", steps=4,
                      output_path=str(out))
        assert result["status"] == "success"
        report = ReportStorage(out).load_report()
        assert "map" not in report
        assert report["reciprocal_convex"] is True
        assert len(ReportStorage.read_csv(tmp_path / "phi_phi.csv")) == 5

    def test_field_export(self, workflow, identity_file, tmp_path):
        out = tmp_path / "field.csv"
        result = _run(workflow, command="field-export", map_path=str(identity_file),
                      radius=0.9, grid=128, output_path=str(out))
        assert result["status"] == "success"
        rows = ReportStorage.read_csv(out)
        assert rows[0] == ["x", "y", "re_f", "im_f", "fsharp", "ratio"]
        assert len(rows) == 128 * 128 + 1
        assert ReportStorage(out).load_report()["field"]["skipped"] == 0

    def test_field_rows_leave_singular_points_empty(self, classical):
        m = HarmonicMap.from_text("1/(z-0.5)", "0")
        rows, skipped = field_rows(m, classical, 0.5, 2)
        assert len(rows) == 4
        assert skipped == 1
        assert rows[2] == ["0.5", "0.0", "", "", "", ""]

    def test_mermaid_diagram(self, workflow):
        diagram = workflow.get_mermaid_diagram()
        assert "Run Analysis" in diagram
        assert "Handle Error" in diagram


class TestMain:

    def test_success(self, config, identity_file, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["analyze", "--map", str(identity_file), "--steps", "3", "--depth", "1",
                     "--out", str(out)])
        assert code == 0
        assert out.exists()
        printed = capsys.readouterr().out
        assert "classification: BoundedEvidence" in printed
        assert printed.startswith("Harmonic Normality Toolkit\n")

    def test_missing_map_flag(self, config, capsys):
        assert main(["analyze"]) == 2
        assert "needs --map" in capsys.readouterr().err

    def test_missing_key(self, config, tmp_path, capsys):
        path = tmp_path / "broken.map"
        path.write_text("g = 0\n", encoding="utf-8")
        code = main(["analyze", "--map", str(path), "--out", str(tmp_path / "r.json")])
        assert code == 2
        assert "'h ='" in capsys.readouterr().err

    def test_unknown_command(self, config):
        with pytest.raises(SystemExit) as excinfo:
            main(["integrate"])
        assert excinfo.value.code == 2

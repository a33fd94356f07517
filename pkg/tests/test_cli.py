"""Front-end contracts: configs, dispatch, serialization, exit codes.

The serialization oracle is the format spec itself: reals at 17
significant digits (1/3 must print as 0.33333333333333331), the fixed
CSV header, and byte-identical output for identical configurations.
Suite contents are exercised through the fast subcommands; the long
branch run has its own acceptance-level coverage elsewhere.
"""

import json
from importlib import resources

import jsonschema
import numpy as np
import pytest
from click.testing import CliRunner

from bilap4d import cli
from bilap4d.errors import InvalidArgumentError
from bilap4d.cli import CheckRecord, Report, RunConfig, emit, run


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def schema():
    ref = resources.files("bilap4d") / "schemas" / "report.schema.json"
    return json.loads(ref.read_text())


@pytest.fixture(scope="module")
def bubble_report():
    return run(RunConfig(subcommand="bubble"))


@pytest.fixture(scope="module")
def green_report():
    return run(RunConfig(subcommand="green", pairs=200))


# ---------------------------------------------------------------------------
# configuration validation


def test_config_rejects_bad_values():
    with pytest.raises(InvalidArgumentError):
        RunConfig(subcommand="bubble", tol=0.0)
    with pytest.raises(InvalidArgumentError):
        RunConfig(subcommand="bubble", tol=-1.0)
    with pytest.raises(InvalidArgumentError):
        RunConfig(subcommand="bubble", fmt="xml")
    with pytest.raises(InvalidArgumentError):
        RunConfig(subcommand="solve", p=1.5)
    with pytest.raises(InvalidArgumentError):
        RunConfig(subcommand="branch", p_start=40.0, p_stop=10.0)
    with pytest.raises(InvalidArgumentError):
        RunConfig(subcommand="spectrum", lmax=7)
    with pytest.raises(InvalidArgumentError):
        RunConfig(subcommand="pohozaev", theta=1.5)
    with pytest.raises(InvalidArgumentError):
        RunConfig(subcommand="green", pairs=0)


def test_run_rejects_unknown_subcommand():
    with pytest.raises(InvalidArgumentError):
        run(RunConfig(subcommand="mystery"))
    with pytest.raises(InvalidArgumentError):
        run(RunConfig(subcommand="verify", suites=("mystery",)))


# ---------------------------------------------------------------------------
# serialization


def _tiny_report():
    rec = CheckRecord(
        check_id="demo.third",
        anchor="plumbing",
        computed=1.0 / 3.0,
        expected=0.0,
        deviation=1.0 / 3.0,
        tolerance=0.5,
    )
    return Report("0.0.0", RunConfig(subcommand="bubble"), (rec,))


def test_reals_printed_at_17_significant_digits():
    data = emit(_tiny_report(), "json").decode()
    assert "0.33333333333333331" in data
    csv_data = emit(_tiny_report(), "csv").decode()
    assert "0.33333333333333331" in csv_data


def test_csv_header_fixed():
    lines = emit(_tiny_report(), "csv").decode().splitlines()
    assert lines[0] == "check_id,anchor,computed,expected,deviation,pass"
    assert lines[1].startswith("demo.third,")
    assert lines[1].endswith(",true")


def test_emit_rejects_unknown_format():
    with pytest.raises(InvalidArgumentError):
        emit(_tiny_report(), "xml")


def test_identical_runs_are_byte_identical(green_report):
    again = run(RunConfig(subcommand="green", pairs=200))
    assert emit(green_report, "json") == emit(again, "json")
    assert emit(green_report, "csv") == emit(again, "csv")


def test_pass_flag_matches_deviation_rule(bubble_report):
    for rec in bubble_report.records:
        assert rec.passed == (rec.deviation <= rec.tolerance)
    assert bubble_report.all_pass


def test_every_record_carries_an_anchor(bubble_report, green_report):
    for rec in bubble_report.records + green_report.records:
        assert rec.anchor
    assert any(rec.anchor == "plumbing" for rec in bubble_report.records)


# ---------------------------------------------------------------------------
# schema conformance


def test_bubble_document_validates(bubble_report, schema):
    doc = json.loads(emit(bubble_report, "json"))
    jsonschema.validate(doc, schema)
    assert doc["constants"]["A"] == pytest.approx(
        -(416.0 / 3.0) * 2.0 * np.pi ** 2, rel=1e-3
    )


def test_solve_document_validates_and_reports_solution(schema):
    report = run(RunConfig(subcommand="solve", p=10.0))
    doc = json.loads(emit(report, "json"))
    jsonschema.validate(doc, schema)
    assert doc["solution"]["p"] == 10.0
    assert doc["all_pass"]


def test_spectrum_document_validates(schema):
    report = run(RunConfig(subcommand="spectrum", p_start=10.0, p_stop=16.0, lmax=2))
    doc = json.loads(emit(report, "json"))
    jsonschema.validate(doc, schema)
    assert doc["all_pass"]
    assert {row["l"] for row in doc["rows"]} == {0, 1, 2}


def test_suite_error_becomes_failure_record(monkeypatch):
    def boom(cfg):
        raise RuntimeError("synthetic breakdown")

    monkeypatch.setitem(cli._SUITES, "green", boom)
    report = run(RunConfig(subcommand="green"))
    assert not report.all_pass
    assert report.records[0].check_id == "green.error"
    assert "synthetic breakdown" in report.records[0].note


# ---------------------------------------------------------------------------
# command-line surface


def test_bubble_stdout_contains_appendix_constants(runner):
    result = runner.invoke(cli.main, ["bubble", "--out", "-"])
    assert result.exit_code == 0
    doc = json.loads(result.output)
    assert doc["constants"]["A"] == pytest.approx(-2737.17, rel=1e-4)


def test_unknown_flag_is_usage_error(runner):
    result = runner.invoke(cli.main, ["bubble", "--bogus"])
    assert result.exit_code == 2


def test_unknown_suite_is_usage_error(runner):
    result = runner.invoke(cli.main, ["verify", "mystery", "--quick"])
    assert result.exit_code == 2
    result = runner.invoke(cli.main, ["verify"])
    assert result.exit_code == 2


def test_bad_p_grid_is_usage_error(runner):
    result = runner.invoke(cli.main, ["branch", "--p-grid", "ten-to-forty"])
    assert result.exit_code == 2


def test_failing_checks_exit_one(runner):
    result = runner.invoke(cli.main, ["bubble", "--tol", "1e-30", "--out", "-"])
    assert result.exit_code == 1
    doc = json.loads(result.output)
    assert not doc["all_pass"]


def test_quick_verify_runs_constant_suites(runner):
    result = runner.invoke(cli.main, ["verify", "--all", "--quick", "--out", "-"])
    assert result.exit_code == 0
    doc = json.loads(result.output)
    suites = {c["check_id"].split(".")[0] for c in doc["checks"]}
    assert suites == {"bubble", "pohozaev"}
    assert doc["all_pass"]


def test_out_path_writes_file(runner, tmp_path):
    target = tmp_path / "report.json"
    result = runner.invoke(cli.main, ["green", "--pairs", "50", "--out", str(target)])
    assert result.exit_code == 0
    doc = json.loads(target.read_text())
    assert doc["config"]["subcommand"] == "green"

import argparse
import json
import pytest

from boundary_map import gate_group
from cli import MIXED_SPECS, _check_closed_form, _parse_range, build_parser, check_algebra, compare_expected, main
from code_catalog import builtin
from errors import SpecValidationError
from wall_search import GeneratorPrediction


def _last_json(text):
    return json.loads(text.strip().splitlines()[-1])


def test_classify_json_report(capsys):
    """Test the JSON report of the surface code"""
    assert main(["classify", "--catalog", "sc2d"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["schema_version"] == "1.0"
    assert report["code"] == "sc2d"
    assert report["wall_count"] == 2
    assert report["boundary"] == "stack"
    assert [g["name"] for g in report["gates"]] == ["H"]
    assert report["gate_generators"] == ["h1"]
    assert report["bounds"]["satisfied"] is True


def test_classify_text_report(capsys):
    """Test the text report lists gates with dimension and level"""
    assert main(["classify", "--catalog", "sc2d", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "Wall group order: 2" in out
    assert "Gates: H (dim 2, level 2)" in out


def test_classify_family_with_parameters(capsys):
    """Test family parameters pass through to the catalog"""
    assert main(["classify", "--catalog", "stack2d", "--n", "2", "--timing"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["wall_count"] == 72
    assert "timing" in report


def test_unknown_catalog_entry_exit_code(capsys):
    """Test an unknown code exits with 2 and a JSON error"""
    assert main(["classify", "--catalog", "nonexistent"]) == 2
    error = _last_json(capsys.readouterr().err)
    assert error["error"] == "UnknownCatalogEntry"


def test_invalid_spec_file(tmp_path, capsys):
    """Test validation errors carry paths on stderr"""
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "bad", "d": 3, "p": 6, "factors": [{"M": 1}]}))
    assert main(["classify", "--spec", str(path)]) == 2
    error = _last_json(capsys.readouterr().err)
    assert error["errors"][0]["path"] == "p"


def test_group_cap_truncates_report(capsys):
    """Test a truncated group still reports generators"""
    assert main(["classify", "--catalog", "stack2d", "--n", "2", "--group-cap", "10"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["truncated"] is True
    assert report["wall_count"] is None


def test_bad_parallelism(capsys):
    """Test non-positive parallelism is rejected up front"""
    assert main(["--parallelism", "0", "catalog"]) == 2
    assert _last_json(capsys.readouterr().err)["errors"][0]["path"] == "--parallelism"


def test_catalog_listing(capsys):
    """Test the catalog command lists entries and families"""
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    assert "sc2d" in out
    assert "levinwen" in out


def test_verify_grid(capsys):
    """Test the closed-form grid on small 2D stacks"""
    assert main(["verify", "--grid", "d=2..2", "n=1..2"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["mismatches"] == []
    assert summary["checks"] == ["stack-d2-M0-n1", "stack-d2-M0-n2"]


def test_verify_catalog_entry(capsys):
    """Test an entry's expected block is checked"""
    assert main(["verify", "--catalog", "levinwen_odd"]) == 0
    assert json.loads(capsys.readouterr().out)["checks"] == ["levinwen_odd"]


def test_verify_algebra(capsys):
    """Test sampled algebra identities through the CLI"""
    assert main(["--seed", "7", "verify", "--algebra", "40"]) == 0
    assert json.loads(capsys.readouterr().out)["checks"] == ["algebra x40"]
    assert check_algebra(20, 3) == []


def test_compare_expected_reports_differences(sc2d_result):
    """Test a wrong expectation becomes a mismatch with its source"""
    entry = builtin("sc2d")
    entry.expected = dict(entry.expected, wall_count=3)
    diffs = compare_expected(entry, sc2d_result, gate_group(sc2d_result))
    assert [d["field"] for d in diffs] == ["wall_count"]
    assert diffs[0]["actual"] == 2


def test_metrics_port_starts_exporter(mocker, capsys):
    """Test --metrics-port enables the Prometheus exporter"""
    configure = mocker.patch("cli.configure_metrics")
    assert main(["--metrics-port", "9555", "catalog"]) == 0
    configure.assert_called_once_with(True, 9555)


def test_parse_range():
    """Test grid ranges"""
    assert _parse_range("d=2..4") == ("d", [2, 3, 4])
    assert _parse_range("n=3") == ("n", [3])
    with pytest.raises(SpecValidationError):
        _parse_range("=1..2")


def test_parser_requires_command():
    """Test a subcommand is mandatory"""
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


@pytest.mark.parametrize("flags, path", [
    (["--group-cap", "0"], "--group-cap"),
    (["--group-cap", "-5"], "--group-cap"),
    (["--max-level", "0"], "--max-level"),
])
def test_non_positive_caps_are_rejected(capsys, flags, path):
    """Test caps and levels below range exit with a validation error"""
    assert main(["classify", "--catalog", "sc2d"] + flags) == 2
    err = _last_json(capsys.readouterr().err)
    assert err["error"] == "SpecValidationError"
    assert [e["path"] for e in err["errors"]] == [path]


def test_bad_metrics_port_and_log_level(capsys):
    """Test the port range and log level are checked before anything runs"""
    assert main(["--metrics-port", "70000", "--log-level", "LOUD", "catalog"]) == 2
    paths = [e["path"] for e in _last_json(capsys.readouterr().err)["errors"]]
    assert paths == ["--metrics-port", "--log-level"]


def test_invalid_configuration_stops_startup(capsys, mocker):
    """Test configuration problems are reported with their dotted path"""
    mocker.patch("cli.config.validate", return_value=["search.candidate_cap must be a positive integer"])
    assert main(["catalog"]) == 2
    issue = _last_json(capsys.readouterr().err)["errors"][0]
    assert issue == {"path": "search.candidate_cap", "message": "must be a positive integer"}


def test_closed_form_check_compares_dimension_and_level(sc2d):
    """Test a generator with the right name but the wrong dimension is a mismatch"""
    args = argparse.Namespace(max_level=None, parallelism=None)
    assert _check_closed_form(sc2d.spec, [GeneratorPrediction("h1", "h", (1,), 1, 2)], args) is None
    diff = _check_closed_form(sc2d.spec, [GeneratorPrediction("h1", "h", (1,), 2, 2)], args)
    assert diff["expected"] == [["h1", 2, 2]]
    assert diff["actual"] == [["h1", 1, 2]]
    diff = _check_closed_form(sc2d.spec, [GeneratorPrediction("h1", "h", (1,), 1, 3)], args)
    assert diff["expected"] == [["h1", 1, 3]]


@pytest.mark.slow
def test_verify_full_closed_form_grid(capsys):
    """Test every uniform stack with d=2..5 and n=1..4 matches its closed form"""
    assert main(["verify", "--grid", "d=2..5", "n=1..4"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["mismatches"] == []
    assert len(summary["checks"]) == 40


@pytest.mark.slow
def test_verify_mixed_factor_stacks(capsys):
    """Test the mixed-factor stacks, decorated ones included, match their closed forms"""
    assert main(["verify", "--mixed"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["mismatches"] == []
    assert len(summary["checks"]) == len(MIXED_SPECS) == 10

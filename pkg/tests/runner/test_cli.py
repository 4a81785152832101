import json
import logging
import math
from pathlib import Path

import pytest
from click.testing import CliRunner

from artin_deligne.defining_graph import parse
from deligne_runner import tasks
from deligne_runner.cli import EXIT_INPUT, EXIT_OK, main

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DATA_DIR = (Path(__file__).parent.parent.parent / "data").resolve()


def run_command(args, tmp_path, name="report.json"):
    """Runs the CLI with the report written to tmp_path and returns (exit code, parsed report)."""
    out = tmp_path / name
    result = CliRunner().invoke(main, [*args, "--out", str(out)])
    logger.info(f"{args}: exit {result.exit_code}")
    report = json.loads(out.read_text()) if out.exists() else None
    return result, report


def test_validate_affine_triangle(tmp_path):
    result, report = run_command(["validate", "--input", str(DATA_DIR / "triangle_333.yaml")], tmp_path)
    assert result.exit_code == EXIT_OK
    classification = report["validate"]["classification"]
    assert classification["two_dimensional"] and not classification["hyperbolic_type"]
    assert sorted(classification["witnesses"]["hyperbolic_type"]) == ["a", "b", "c"]


def test_metric_moussong(tmp_path):
    result, report = run_command(["metric", "--input", str(DATA_DIR / "triangle_333.yaml"), "--mode", "moussong"],
                                 tmp_path)
    assert result.exit_code == EXIT_OK
    assert report["metric"]["epsilon"] == 0.0
    assert report["settings"]["mode"] == "moussong"


def test_metric_hyperbolic_rejects_affine_input(tmp_path):
    result, report = run_command(["metric", "--input", str(DATA_DIR / "triangle_333.yaml")], tmp_path)
    assert result.exit_code == EXIT_INPUT
    assert report is None, "no report is written for invalid input"


def test_example_report(tmp_path):
    result, report = run_command(["report", "--input", str(DATA_DIR / "example.yaml"), "--dot", str(tmp_path / "dot")],
                                 tmp_path)
    assert result.exit_code == EXIT_OK, result.output
    assert set(report) >= {"tool", "input", "settings", "parameter_hash", "validate", "metric", "links", "cone", "trees"}
    assert "geodesics" not in report
    assert report["metric"]["epsilon"] == pytest.approx(math.pi / 2016, rel=1e-15)
    assert report["links"]["verified"] and report["cone"]["verified"] and report["trees"]["verified"]
    assert len(report["trees"]["components"]) == 3
    st_link = report["links"]["links"]["{s,t}"]
    assert st_link["method"] == "exhaustive-within-ball" and st_link["exponent_bound"] == 1
    assert (tmp_path / "dot" / "cut_graph.dot").exists()

    g = parse((DATA_DIR / "example.yaml").read_text())
    assert report["parameter_hash"] == tasks.parameter_hash(g, report["settings"])


def test_report_is_deterministic(tmp_path):
    args = ["report", "--input", str(DATA_DIR / "example.yaml"), "--seed", "3"]
    run_command(args, tmp_path, "a.json")
    run_command(args, tmp_path, "b.json")
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()


def test_missing_input_file(tmp_path):
    result, _ = run_command(["validate", "--input", str(tmp_path / "nowhere.yaml")], tmp_path)
    assert result.exit_code == EXIT_INPUT


def test_malformed_document(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("generators: [s, t]\nrelations:\n- pair: [s, t]\n  m: 1\n")
    result, _ = run_command(["validate", "--input", str(path)], tmp_path)
    assert result.exit_code == EXIT_INPUT


def test_input_is_required(tmp_path):
    result, report = run_command(["links"], tmp_path)
    assert result.exit_code == EXIT_INPUT, "usage errors must not look like a refuted section"
    assert "--input" in result.output
    assert report is None


def test_unknown_mode_is_an_input_error(tmp_path):
    result, report = run_command(["metric", "--input", str(DATA_DIR / "example.yaml"), "--mode", "spherical"],
                                 tmp_path)
    assert result.exit_code == EXIT_INPUT
    assert "--mode" in result.output
    assert report is None


def test_unknown_command_is_an_input_error():
    result = CliRunner().invoke(main, ["nonsense"])
    assert result.exit_code == EXIT_INPUT


def test_sanitize():
    record = {"a": (1.0, math.inf), 3: {"b": 1 / 3}}
    assert tasks.sanitize(record) == {"a": [1.0, None], "3": {"b": 1 / 3}}
    assert tasks.sanitize(record, digits=3)["3"]["b"] == 0.333
    text = tasks.dump_json({"x": math.nan})
    assert json.loads(text) == {"x": None}


@pytest.mark.parametrize("value", [math.pi / 2016, 0.1, 1 / 3, 2 ** -1074, 1.7976931348623157e308, -math.e])
def test_report_floats_are_lossless(value):
    text = tasks.dump_json({"x": value})
    written = json.loads(text)["x"]
    assert written == value, f"{value!r} came back as {written!r}"
    mantissa = text.split(":")[1].strip().rstrip("}\n ").lstrip("-").split("e")[0]
    assert len(mantissa.replace(".", "").lstrip("0")) <= 17


def test_float_digits_rounds_the_report(tmp_path):
    config = tmp_path / "config.yaml"
    config.write_text("float_digits: 4\n")
    result, full = run_command(["metric", "--input", str(DATA_DIR / "example.yaml")], tmp_path)
    assert result.exit_code == EXIT_OK
    result, rounded = run_command(["metric", "--input", str(DATA_DIR / "example.yaml"), "--config", str(config)],
                                  tmp_path, "rounded.json")
    assert result.exit_code == EXIT_OK
    epsilon = full["metric"]["epsilon"]
    assert rounded["metric"]["epsilon"] == float(f"{epsilon:.4g}") != epsilon


def test_write_atomic_replaces(tmp_path):
    path = tmp_path / "nested" / "out.json"
    tasks.write_atomic(path, "one")
    tasks.write_atomic(path, "two")
    assert path.read_text() == "two"
    assert [p.name for p in path.parent.iterdir()] == ["out.json"]

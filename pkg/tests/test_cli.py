import json
import os
import pathlib
import subprocess
import sys

import jsonschema
import pytest

from poissonlr.cli.main import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, emit_report, main, run
from poissonlr.cli.syntax import parse_expression
from poissonlr.exact.presentation import builtin

ROOT = pathlib.Path(__file__).resolve().parent.parent
SCHEMA = json.loads((ROOT / "docs" / "report.schema.json").read_text())
GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"
REGEN = os.environ.get("POISSONLR_REGEN_GOLDEN") == "1"


def cli_json(*argv):
    rep, code, fmt = run(list(argv) + ["--format", "json"])
    text = emit_report(rep, fmt)
    return json.loads(text), text, code


def test_normalize_commutator():
    doc, _, code = cli_json("normalize", "--presentation", "canonical1", "[q,p]")
    assert code == EXIT_PASS
    assert doc["data"]["results"][0]["normal_form"] == "Z"


def test_failing_equality_reports_both_sides():
    doc, _, code = cli_json("equal", "--presentation", "canonical1", "[q,p]", "0")
    assert code == EXIT_FAIL and not doc["ok"]
    (c,) = doc["checks"]
    assert c["verdict"] == "FAIL"
    assert (c["witness"]["lhs"], c["witness"]["rhs"]) == ("Z", "0")


@pytest.mark.parametrize("argv", [
    ["normalize", "--presentation", "canonical1", "{q, p"],
    ["normalize", "--presentation", "canonical1", "nosuch"],
    ["normalize", "--presentation", "nowhere"],
    ["equal", "--presentation", "circle", "--mode", "bogus", "f", "f"],
    ["build-z", "--presentation", "line"],
    ["verify", "stabilization", "--presentation", "circle"],
    ["selftest", "--only", "99"],
    [],
])
def test_usage_errors_exit_2(argv):
    doc, _, code = cli_json(*argv)
    assert code == EXIT_USAGE
    assert doc["errors"] and not doc["ok"]


def test_parse_error_names_position(capsys):
    assert main(["normalize", "--presentation", "canonical1", "{q, p"]) == EXIT_USAGE
    out = capsys.readouterr().out
    assert "line 1, column 6" in out


def test_corrupted_presentation_file(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("kind: circle\nsmoothness: [oops\n")
    doc, _, code = cli_json("normalize", "--presentation", str(path), "Z")
    assert code == EXIT_USAGE
    assert doc["errors"]


def test_expression_file(tmp_path):
    path = tmp_path / "exprs.txt"
    path.write_text("# comment\n[q1,p1]\n\n{q1,p1}\n")
    doc, _, code = cli_json("normalize", "--presentation", "canonical1", "--file", str(path))
    assert code == EXIT_PASS
    assert doc["data"]["inputs"] == ["[q1,p1]", "{q1,p1}"]


def test_selftest_subset():
    doc, _, code = cli_json("selftest", "--only", "thm31")
    assert code == EXIT_PASS
    assert [c["statement"] for c in doc["checks"]] == [
        "criterion 2 [thm31-compact]", "criterion 3 [thm31-noncompact]"]


REPORTS = {
    "normalize_canonical1": ["normalize", "--presentation", "canonical1", "[q,p]", "{q,p}", "star(q.p)"],
    "equal_fail": ["equal", "--presentation", "canonical1", "[q,p]", "0"],
    "equal_circle": ["equal", "--presentation", "circle", "{v,f}", "[v,f]"],
    "farkas_canonical1": ["derive-farkas", "--presentation", "canonical1", "q", "p", "p", "q"],
    "buildz_circle_two_arcs": ["build-z", "--presentation", "circle", "--cover", "two-arcs"],
    "realize_circle_quantum": ["realize", "--presentation", "circle", "--backend", "quantum", "{v,f}"],
    "verify_thm31_canonical2": ["verify", "thm31", "--presentation", "canonical2", "--samples", "3"],
    "usage_error": ["normalize", "--presentation", "canonical1", "{q, p"],
}


@pytest.mark.parametrize("name", sorted(REPORTS))
def test_report_matches_schema(name):
    doc, _, _ = cli_json(*REPORTS[name])
    jsonschema.validate(doc, SCHEMA)


@pytest.mark.parametrize("name", sorted(REPORTS))
def test_report_is_byte_identical_across_runs(name):
    _, first, _ = cli_json(*REPORTS[name])
    _, second, _ = cli_json(*REPORTS[name])
    assert first == second


@pytest.mark.parametrize("name", sorted(REPORTS))
def test_golden(name):
    _, text, _ = cli_json(*REPORTS[name])
    path = GOLDEN / f"{name}.json"
    if REGEN:
        path.write_text(text)
    assert text == path.read_text()


def test_embedded_expressions_parse_back():
    doc, _, _ = cli_json(*REPORTS["normalize_canonical1"])
    pres = builtin("canonical1")
    for res in doc["data"]["results"]:
        parse_expression(res["normal_form"], pres)
    doc, _, _ = cli_json(*REPORTS["buildz_circle_two_arcs"])
    parse_expression(doc["data"]["z_term"], builtin("circle"))


def test_build_z_two_arcs():
    doc, _, code = cli_json(*REPORTS["buildz_circle_two_arcs"])
    assert code == EXIT_PASS
    assert doc["data"]["summands"] == 2
    assert all(c["verdict"] == "PASS" for c in doc["checks"])


def test_console_script_runs():
    exe = [sys.executable, "-m", "poissonlr.cli.main"]
    proc = subprocess.run(exe + ["normalize", "--presentation", "canonical1", "[q,p]"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "[q,p]  ->  Z" in proc.stdout
    proc = subprocess.run(exe + ["normalize", "--presentation", "canonical1", "[q,"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
    assert "Traceback" not in proc.stdout + proc.stderr

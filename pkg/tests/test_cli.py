from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import pytest

from dgatlas.checks import REGISTRY, list_checks
from dgatlas.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, check_seed, main
from dgatlas.scene import SceneError, load_schema, parse_scene_text

ROOT = Path(__file__).resolve().parent.parent
SCENES = ROOT / "scenes"
DOCS = ROOT / "docs"

EXPECTED_REGISTRY = [
    "homological", "hochschild-square", "dh-vs-bracket", "dh-lq-anticommute", "leibniz-cup",
    "jacobi-gerstenhaber", "delta-defining", "delta-appendix", "hopf-axioms", "pbw-hkr-decomposition",
    "theta-membership", "r1-diagram", "atiyah-cocycle-closed", "atiyah-class-independence", "tensor-cocycle",
    "functoriality-homotopy", "prop-bracket", "liepair-suite",
]

SMALL_MIXED = {
    "chart": [["x", 0], ["xi", 1], ["eta", -1]],
    "Q": {"x": "xi", "eta": "xi*eta"},
    "checks": ["hochschild-square", "leibniz-cup", "delta-defining"],
    "seed": 5,
    "bounds": {"samples": 8},
}


def write(tmp_path: Path, data, name: str = "scene.json") -> Path:
    p = tmp_path / name
    p.write_text(data if isinstance(data, str) else json.dumps(data, indent=2))
    return p


def run(*args) -> int:
    return main([str(a) for a in args])


def strip_timing(report: dict) -> dict:
    for entry in report["checks"]:
        entry.pop("seconds")
    return report


def test_registry_order_and_uniqueness(capsys):
    assert list_checks() == EXPECTED_REGISTRY
    assert len(set(list_checks())) == len(REGISTRY)
    assert "r1-diagram" in list_checks()
    assert all(spec.module for spec in REGISTRY)
    assert run("run", "--list-checks") == EXIT_PASS
    lines = capsys.readouterr().out.splitlines()
    assert [line.split("\t")[0] for line in lines] == EXPECTED_REGISTRY


def test_zero_field_passes(tmp_path):
    out = tmp_path / "r.json"
    assert run("run", SCENES / "zero_field.json", "--out", out) == EXIT_PASS
    report = json.loads(out.read_text())
    assert [c["name"] for c in report["checks"]] == ["homological"]
    assert report["summary"] == {"pass": 1, "fail": 0, "skipped": 0}


def test_non_jacobi_fails_with_rendered_term(tmp_path):
    out = tmp_path / "r.json"
    assert run("run", SCENES / "non_jacobi.json", "--out", out) == EXIT_FAIL
    report = json.loads(out.read_text())
    hom = next(c for c in report["checks"] if c["name"] == "homological")
    assert hom["status"] == "fail"
    assert hom["counterexample"]["lhs"] == "- 2*xi1*xi2*xi3*d_xi3"
    assert hom["counterexample"]["rhs"] == "0"


def test_replay_reproduces_failure(tmp_path):
    out = tmp_path / "r.json"
    run("run", SCENES / "non_jacobi.json", "--out", out)
    report = json.loads(out.read_text())
    cex = next(c for c in report["checks"] if c["name"] == "homological")["counterexample"]
    single = write(tmp_path, cex, "cex.json")
    again = tmp_path / "again.json"
    assert run("run", "--replay", single, "--out", again) == EXIT_FAIL
    replayed = json.loads(again.read_text())["checks"][0]
    assert replayed["counterexample"]["lhs"] == cex["lhs"]
    # a whole report replays every counterexample it holds
    assert run("run", "--replay", out, "--out", again) == EXIT_FAIL
    assert json.loads(again.read_text())["summary"]["fail"] == 2


def test_reports_are_deterministic(tmp_path):
    scene = write(tmp_path, SMALL_MIXED)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("run", scene, "--out", a) == EXIT_PASS
    assert run("run", scene, "--out", b) == EXIT_PASS
    assert strip_timing(json.loads(a.read_text())) == strip_timing(json.loads(b.read_text()))


def test_seed_override_changes_streams(tmp_path):
    scene = write(tmp_path, SMALL_MIXED)
    out = tmp_path / "r.json"
    assert run("run", scene, "--seed", 99, "--out", out) == EXIT_PASS
    assert json.loads(out.read_text())["seed"] == 99
    assert check_seed(5, "leibniz-cup") != check_seed(99, "leibniz-cup")
    assert check_seed(5, "leibniz-cup") != check_seed(5, "delta-defining")


def test_report_validates_against_schema(tmp_path):
    scene = write(tmp_path, SMALL_MIXED)
    out = tmp_path / "r.json"
    run("run", scene, "--out", out)
    schema = json.loads((DOCS / "report.schema.json").read_text())
    jsonschema.validate(json.loads(out.read_text()), schema)
    sorted_names = [c["name"] for c in json.loads(out.read_text())["checks"]]
    assert sorted_names == sorted(SMALL_MIXED["checks"])


@pytest.mark.parametrize("name", ["scene", "report"])
def test_docs_schemas_match_package(name):
    assert json.loads((DOCS / f"{name}.schema.json").read_text()) == load_schema(name)


@pytest.mark.parametrize("path", sorted(SCENES.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_scenes_validate(path):
    parse_scene_text(path.read_text())


def test_json_syntax_error_has_position(tmp_path, capsys):
    scene = write(tmp_path, '{\n  "chart": [["x", 0]],\n  "seed": ,\n}')
    assert run("run", scene) == EXIT_USAGE
    assert "line 3" in capsys.readouterr().err


def test_bad_expression_has_position(tmp_path, capsys):
    raw = '{\n  "chart": [["x", 0], ["xi", 1]],\n  "Q": {"x": "xi + * x"}\n}'
    assert run("run", write(tmp_path, raw)) == EXIT_USAGE
    # the string body starts in column 15 and the offending token is at offset 5
    assert "(line 3, column 20)" in capsys.readouterr().err


def test_schema_violation_has_position():
    raw = '{\n  "chart": [["x", 0]],\n  "seed": -3\n}'
    with pytest.raises(SceneError) as info:
        parse_scene_text(raw)
    assert info.value.line == 3


def test_unknown_check_lists_registry(tmp_path, capsys):
    scene = write(tmp_path, dict(SMALL_MIXED, checks=["no-such-check"]))
    assert run("run", scene) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "no-such-check" in err and "r1-diagram" in err


def test_usage_errors(tmp_path):
    assert run("run") == EXIT_USAGE
    assert run("run", tmp_path / "missing.json") == EXIT_USAGE
    assert run("frobnicate") == EXIT_USAGE


def test_odd_q_degree_is_rejected(tmp_path):
    bad = dict(SMALL_MIXED, Q={"x": "x"})
    assert run("run", write(tmp_path, bad)) == EXIT_USAGE


def test_stdout_report(tmp_path, capsys):
    assert run("run", SCENES / "zero_field.json") == EXIT_PASS
    assert json.loads(capsys.readouterr().out)["summary"]["pass"] == 1

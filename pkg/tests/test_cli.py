import json
import subprocess
import sys

import pytest

from conftest import fixture_path
from toricbt.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out else None


def test_validate_exit_codes(capsys):
    assert run(capsys, "validate", fixture_path("phi1"))[0] == 0
    assert run(capsys, "validate", fixture_path("phi2"))[0] == 0
    code, doc = run_json(capsys, "validate", fixture_path("phi2_mutated"))
    assert code == 2 and not doc["ok"]
    assert doc["violations"][0]["vertex"] == ["0"]


def test_split_outputs(capsys):
    code, doc = run_json(capsys, "split", fixture_path("phi1"))
    assert code == 0 and doc == {"verdict": "split", "frame": [["1", "0"], ["0", "1"]]}
    code, doc = run_json(capsys, "split", fixture_path("phi2"))
    assert code == 0 and doc["verdict"] == "not_split"
    assert doc["certificate"]["tripod_vertex"]["lattice"] == [["1", "0"], ["0", "1/2"]]
    assert len(doc["certificate"]["legs"]) == 3


def test_split_unknown_exit_code(capsys):
    code, doc = run_json(capsys, "split", fixture_path("rank3_unknown"), "--depth", "0")
    assert code == 3 and doc["verdict"] == "unknown"


def test_eval_and_errors(capsys):
    code, doc = run_json(capsys, "eval", fixture_path("phi1"), "--at", "1/2", "--cell", "pos")
    assert code == 0 and doc["values"] == ["0", "1/2"] and doc["point"] == ["1/2"]
    code, doc = run_json(capsys, "eval", fixture_path("phi1"), "--at", "-2")
    assert doc["values"] == ["0", "-2"]
    code, out, err = run(capsys, "eval", fixture_path("phi1"), "--at", "-1", "--cell", "pos")
    assert code == 2 and out == "" and "not in cell" in err
    assert run(capsys, "eval", fixture_path("phi1"), "--at", "x")[0] == 1


def test_lattice_and_generic_fiber(capsys):
    code, doc = run_json(capsys, "lattice", fixture_path("phi2"), "--vertex", "0", "--char", "0")
    assert code == 0 and doc["exponents"] == [0, 0] and doc["consistent_across_cells"]
    assert run(capsys, "lattice", fixture_path("phi2"), "--vertex", "0", "--char", "a")[0] == 1
    assert run(capsys, "lattice", fixture_path("phi2"), "--vertex", "5", "--char", "0")[0] == 2
    code, doc = run_json(capsys, "generic-fiber", fixture_path("phi1"))
    assert code == 0 and [e["ray"] for e in doc["klyachko"]] == [[-1], [1]]


def test_hom(capsys):
    code, doc = run_json(capsys, "hom", fixture_path("phi1"), fixture_path("phi1"), "--map", fixture_path("identity2"))
    assert code == 0 and doc == {"morphism": True}
    code, doc = run_json(
        capsys, "hom", fixture_path("phi1"), fixture_path("phi1"), "--map", fixture_path("half2"), "--sample", "20"
    )
    assert doc["morphism"] is False and doc["witness"]["vertex"] == ["0"]
    assert doc["sampled"]["violation"] is not None


def test_tree_commands(capsys):
    code, out, _ = run(capsys, "tree", "--p", "2", "dot", "--radius", "1")
    assert code == 0 and out.count("[label=") == 4 and out.count(" -- ") == 3
    code, doc = run_json(capsys, "tree", "--p", "3", "neighbors")
    assert len(doc["neighbors"]) == 4
    code, doc = run_json(capsys, "tree", "geodesic", "--from", "[[1,0],[0,1]]", "--to", "[[1,0],[0,8]]")
    assert doc["distance"] == 3 and len(doc["path"]) == 4
    code, doc = run_json(capsys, "tree", "helly", "--vertices", "[[[1,0],[0,2]],[[2,0],[0,1]],[[1,1],[0,2]]]")
    assert doc["helly_triples"] is False and doc["frame"] is None
    assert doc["certificate"]["tripod_vertex"]["exponent"] == 0
    assert run(capsys, "tree", "dot", "--radius", "9")[0] == 2
    assert run(capsys, "tree", "--p", "4", "neighbors")[0] == 1


def test_format_rules(capsys):
    assert run(capsys, "--format", "dot", "split", fixture_path("phi1"))[0] == 1
    assert run(capsys, "tree", "dot", "--format", "json")[0] == 1
    code, out, _ = run(capsys, "split", fixture_path("phi1"), "--format", "text")
    assert code == 0 and out.startswith('verdict: "split"')


def test_parse_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "validate", str(bad))[0] == 1
    extra = tmp_path / "extra.json"
    doc = json.loads(open(fixture_path("phi1")).read())
    doc["surprise"] = 1
    extra.write_text(json.dumps(doc))
    assert run(capsys, "validate", str(extra))[0] == 1
    assert run(capsys, "validate", str(tmp_path / "missing.json"))[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1


def test_field_override(capsys):
    code, doc = run_json(capsys, "validate", fixture_path("phi1"), "--field", '{"backend":"laurent"}')
    assert code == 0 and doc["ok"]
    assert run(capsys, "validate", fixture_path("phi1"), "--field", "{")[0] == 1


def test_output_is_byte_stable():
    cmd = [sys.executable, "-m", "toricbt.cli", "hom", fixture_path("phi2"), fixture_path("phi2"),
           "--map", fixture_path("identity2"), "--sample", "15", "--seed", "7"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first.endswith(b"\n")

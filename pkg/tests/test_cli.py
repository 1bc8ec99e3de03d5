import json
import subprocess
import sys
from pathlib import Path

import pytest

from artifact.cli import main

DATA = Path(__file__).parent / "data"


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_gb_complete_symmetric_gives_phi(tmp_path, capsys):
    f = _write(tmp_path, "h.txt", "# h1, h2, h3 in three variables\n"
               "x1 + x2 + x3\n"
               "x1^2 + x2^2 + x3^2 + x1*x2 + x1*x3 + x2*x3\n"
               "x1^3+x2^3+x3^3+x1^2*x2+x1^2*x3+x2^2*x1+x2^2*x3+x3^2*x1+x3^2*x2+x1*x2*x3\n")
    assert main(["gb", f, "--order", "x3,x2,x1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert sorted(out) == sorted(["x3 + x2 + x1", "x2^2 + x2*x1 + x1^2", "x1^3"])


def test_gb_json_and_output_file(tmp_path):
    f = _write(tmp_path, "g.txt", "-2*x + 4*y\n")
    out = tmp_path / "basis.json"
    assert main(["gb", f, "--json", "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["generators"] == ["2*x - 4*y"]


def test_gb_input_errors(tmp_path, capsys):
    assert main(["gb", _write(tmp_path, "e.txt", "# nothing\n0\n")]) == 2
    assert "empty generator list" in capsys.readouterr().err
    assert main(["gb", _write(tmp_path, "bad.txt", "x + * y\n")]) == 2
    assert main(["gb", str(tmp_path / "absent.txt")]) == 2
    f = _write(tmp_path, "o.txt", "x + y\n")
    assert main(["gb", f, "--order", "x,x"]) == 2
    assert main(["gb", f, "--vars", "x,y", "--order", "z"]) == 2


def test_gb_pair_budget_exit(tmp_path, capsys):
    f = _write(tmp_path, "h.txt", "x^2*y - 1\nx*y^2 - x\n")
    assert main(["gb", f, "--max-pairs", "0"]) == 3
    assert "pair budget" in capsys.readouterr().err


def test_intersect(tmp_path, capsys):
    a, b = _write(tmp_path, "a.txt", "x\n"), _write(tmp_path, "b.txt", "z\n")
    assert main(["intersect", a, b]) == 0
    assert capsys.readouterr().out == "x*z\n"
    c = _write(tmp_path, "c.txt", "x^2 - z\nx*z\n")
    assert main(["intersect", c, c]) == 0
    self_int = capsys.readouterr().out
    assert main(["gb", c]) == 0
    assert capsys.readouterr().out == self_int


def test_intersect_reserved_variable(tmp_path, capsys):
    a, b = _write(tmp_path, "a.txt", "y\n"), _write(tmp_path, "b.txt", "x\n")
    assert main(["intersect", a, b]) == 2
    assert "reserved" in capsys.readouterr().err


def test_nf(tmp_path, capsys):
    f = _write(tmp_path, "b.txt", "2*x\n3*y\n")
    assert main(["nf", f, "x*y + 5*x + 1", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["normal_forms"] == ["x + 1"]


def test_flagloop_n1_matches_golden_and_is_deterministic(tmp_path, capsys):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["flagloop", "--n", "1", "-o", str(out1)]) == 0
    text = capsys.readouterr().out
    assert "final page E3: total free rank 9" in text and "torsion order" in text
    assert main(["flagloop", "--n", "1", "-o", str(out2), "--workers", "2", "--json"]) == 0
    assert out1.read_bytes() == out2.read_bytes() == (DATA / "flagloop_n1.json").read_bytes()
    manifest = json.loads((tmp_path / "a.manifest.json").read_text())
    assert manifest["n"] == 1 and manifest["cap"] == 8 and manifest["schema"] == 1
    assert set(manifest["timings"]) == {"d2", "total"}


def test_flagloop_errors(tmp_path, capsys):
    assert main(["flagloop", "--n", "4", "-o", str(tmp_path / "x.json")]) == 5
    assert main(["flagloop", "--n", "3", "--cap", "10", "-o", str(tmp_path / "x.json")]) == 4
    assert "below 12" in capsys.readouterr().err


@pytest.fixture(scope="module")
def su4_result(tmp_path_factory):
    out = tmp_path_factory.mktemp("su4") / "flagloop_n3.json"
    assert main(["flagloop", "--n", "3", "-o", str(out)]) == 0
    return out


def test_verify_su4_fresh_run(su4_result, capsys):
    assert main(["verify-su4", str(su4_result)]) == 1
    out = capsys.readouterr().out
    assert "PASS torsion orders lie in {2, 4} with order 4 present" in out
    assert "FAIL generator families and boundaries span the permanent cycles" in out
    assert "(x2)_1*y1*y2*y3" in out


def test_verify_su4_tampered_torsion(su4_result, tmp_path, capsys):
    data = json.loads(su4_result.read_text())
    comp = next(c for c in data["components"] if c["torsion"] == [2])
    comp["torsion"] = [8]
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(data))
    assert main(["verify-su4", str(bad), "--json"]) == 1
    report = json.loads(capsys.readouterr().out)
    item = next(c for c in report["checks"] if c["name"].startswith("torsion orders"))
    assert not item["passed"] and any("[8]" in d for d in item["details"])


def test_verify_su4_missing_family(su4_result, tmp_path, capsys):
    data = json.loads(su4_result.read_text())
    comp = next(c for c in data["components"] if c["x"] == [0, 0, 0] and c["k"] == 0 and c["p"] == 1)
    comp["Z"] = [[0, 0, 1]]
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(data))
    assert main(["verify-su4", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "FAIL every generator family is a permanent cycle" in out
    assert "g2: not a permanent cycle at 1" in out and "g1: not a permanent cycle at 1" in out


def test_verify_su4_input_errors(tmp_path):
    assert main(["verify-su4", str(tmp_path / "absent.json")]) == 2
    assert main(["verify-su4", _write(tmp_path, "bad.json", "{not json")]) == 2
    assert main(["verify-su4", _write(tmp_path, "wrong.json", '{"schema": 1}')]) == 2


def test_identities(capsys):
    assert main(["identities", "--seed", "7"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4 and all(l.startswith("PASS") for l in lines)
    assert main(["identities", "--json"]) == 0
    assert all(c["passed"] for c in json.loads(capsys.readouterr().out)["checks"])


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "artifact", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "Exit codes" in r.stdout
    r = subprocess.run([sys.executable, "-m", "artifact", "flagloop", "--n", "7"], capture_output=True, text=True)
    assert r.returncode == 5

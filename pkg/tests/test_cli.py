import json
import subprocess
import sys

import pytest

from holonomy_lab import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_triangle_default(capsys):
    code, doc = run(["triangle-holonomy"], capsys)
    rep = doc["report"]
    assert code == 0 and rep["pass"] and rep["delta"] == 1
    assert rep["distance_inf"] < 1e-6 and len(rep["angles"]) == 3


def test_triangle_reversed_uses_negative_branch(capsys):
    code, doc = run(["triangle-holonomy", "--orientation", "-1"], capsys)
    assert code == 0 and doc["report"]["delta"] == -1
    assert all(a < 0 for a in doc["report"]["angles"])


def test_triangle_random_and_dim(capsys):
    code, doc = run(["triangle-holonomy", "--random", "--seed", "4", "--dim", "3"], capsys)
    assert code == 0 and len(doc["report"]["holonomy"]) == 4


def test_triangle_collinear_is_invalid(capsys):
    code = cli.main(["triangle-holonomy", "--vertices", "1,0;2,0"])
    err = capsys.readouterr().err
    assert code == 2 and "DegenerateTriangle" in err


@pytest.mark.parametrize("argv", [
    ["subdivision-audit", "--depth", "7"],
    ["theorem", "--dim", "1"],
    ["triangle-holonomy", "--tol", "-1"],
    ["triangle-holonomy", "--vertices", "a,b"],
    ["nonsense"],
])
def test_validation_exit_code(argv, capsys):
    assert cli.main(argv) == 2
    capsys.readouterr()


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("HOLONOMY_LAB_THREADS", "zero")
    assert cli.main(["subdivision-audit", "--depth", "1"]) == 2
    monkeypatch.setenv("HOLONOMY_LAB_THREADS", "3")
    code, doc = run(["subdivision-audit", "--depth", "1"], capsys)
    assert code == 0 and doc["config"]["threads"] == 3


def test_audit_depth2(capsys, tmp_path):
    code, doc = run(["subdivision-audit", "--depth", "2", "--out", str(tmp_path)], capsys)
    rep = doc["report"]
    assert code == 0 and rep["pass"]
    assert [r["count"] for r in rep["levels"]] == [1, 12, 84]
    assert len(rep["triangles"]) == 84
    assert (tmp_path / "level_2.json").exists() and (tmp_path / "report.json").exists()


def test_audit_depth0(capsys):
    code, doc = run(["subdivision-audit", "--depth", "0"], capsys)
    assert code == 0 and doc["report"]["levels"][0]["count"] == 1


@pytest.mark.parametrize("depth", [1, 3])
def test_audit_corruption(depth, capsys):
    code, doc = run(["subdivision-audit", "--depth", str(depth), "--corrupt"], capsys)
    assert code == 3 and doc["report"]["levels"][-1]["violations"]["P4"]


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# audit settings\ndepth = 2\norientation = -1\n")
    code, doc = run(["subdivision-audit", "--config", str(cfg), "--depth", "1"], capsys)
    assert code == 0
    assert doc["config"]["depth"] == 1 and doc["config"]["orientation"] == -1
    cfg.write_text("depth = two\n")
    assert cli.main(["subdivision-audit", "--config", str(cfg)]) == 2
    cfg.write_text("colour = red\n")
    assert cli.main(["subdivision-audit", "--config", str(cfg)]) == 2
    capsys.readouterr()


def test_json_deterministic_apart_from_timestamp(capsys):
    _, a = run(["triangle-holonomy"], capsys)
    _, b = run(["triangle-holonomy"], capsys)
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_theorem_depth0(capsys):
    code, doc = run(["theorem", "--depth", "0"], capsys)
    rows = doc["report"]["rows"]
    assert len(rows) == 1 and rows[0]["n"] == 0 and rows[0]["triangles"] == 1
    assert code == 0


def test_theorem_outputs(tmp_path, capsys):
    code, doc = run(["theorem", "--depth", "2", "--out", str(tmp_path)], capsys)
    assert code == 0
    csv_lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert csv_lines[0].startswith("n,triangles") and len(csv_lines) == 3
    fib = json.loads((tmp_path / "fiber.json").read_text())
    assert fib["n"] == 2 and len(fib["triangles"]) == 84
    assert (tmp_path / "f_samples.csv").exists()


def test_bumped_theorem_cauchy_decreasing(capsys):
    code, doc = run(["theorem", "--disk", "bumped-disk", "--dim", "3", "--amplitude", "0.3",
                     "--depth", "3"], capsys)
    checks = doc["report"]["checks"]
    assert checks["cauchy_decreasing"] and checks["holonomy_distance_decreasing"]


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "holonomy_lab.cli", "subdivision-audit",
                          "--depth", "1"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["report"]["pass"]

import csv
import dataclasses
import io
import json
import os
import re
import shlex
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from polyineq import audit, cli
from polyineq.cli import parse_grid

ROOT = Path(__file__).resolve().parents[1]
PRODUCT3 = str(ROOT / "data" / "product3.json")


def readme_examples():
    text = (ROOT / "README.md").read_text()
    cmds = []
    for block in re.findall(r"```console\n(.*?)```", text, re.S):
        for line in block.splitlines():
            line = line.split("  #")[0].strip()
            if line.startswith("$ ") and "polyineq " in line and "pip " not in line:
                cmds.append(line[2:])
    return cmds


EXAMPLES = readme_examples()


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_readme_has_examples():
    assert len(EXAMPLES) >= 12
    assert any("--suite full" in c for c in EXAMPLES)


@pytest.mark.parametrize("cmd", [c for c in EXAMPLES if "--suite full" not in c])
def test_readme_example_runs(cmd, tmp_path, monkeypatch, capsys):
    shutil.copytree(ROOT / "data", tmp_path / "data")
    monkeypatch.chdir(tmp_path)
    tokens = shlex.split(cmd)
    env = {}
    while "=" in tokens[0]:
        key, val = tokens.pop(0).split("=", 1)
        env[key] = val
    assert tokens[0] == "polyineq"
    if env:
        res = subprocess.run([sys.executable, "-m", "polyineq", *tokens[1:]], capture_output=True,
                             text=True, env=dict(os.environ, **env))
        assert res.returncode == 0, res.stderr
        out = res.stdout
    else:
        code, out, err = run(tokens[1:], capsys)
        assert code == 0, err
    assert out.strip()
    if tokens[1] in ("norm", "derivative", "extremal", "search-k", "polarize"):
        json.loads(out)


@pytest.mark.slow
def test_readme_full_audit(full_audit):
    code, lines, _ = full_audit
    assert code == 0
    summary = lines[-1]["summary"]
    assert summary["failures"] == 0
    assert summary["records"] == 20 * len(audit.CHECK_IDS)


def test_norm_value(capsys):
    code, out, _ = run(["norm", "--input", PRODUCT3, "--p", "1"], capsys)
    assert code == 0
    assert json.loads(out)["poly"]["value"] == pytest.approx(1 / 27, abs=1e-12)


def test_derivative_sup(capsys):
    code, out, _ = run(["derivative", "--input", PRODUCT3, "--k", "1", "--p", "1",
                        "--field", "complex"], capsys)
    assert code == 0
    assert json.loads(out)["sup_poly"]["value"] == pytest.approx(0.25, abs=1e-9)


def test_derivative_at_point_from_file(tmp_path, capsys):
    xf = tmp_path / "x.json"
    xf.write_text("[0.5, 0.5, 0.0]")
    code, out, _ = run(["derivative", "--input", PRODUCT3, "--k", "1", "--p", "2",
                        "--x", str(xf)], capsys)
    d = json.loads(out)
    assert code == 0 and d["r"] == pytest.approx(2 ** -0.5)
    assert d["poly"]["value"] <= d["multilinear"]["value"] + 1e-9


def test_polarize_output_round_trips(tmp_path, capsys):
    out_file = tmp_path / "form.json"
    code, _, _ = run(["polarize", "--input", str(ROOT / "data" / "cross2.json"),
                      "-o", str(out_file)], capsys)
    assert code == 0
    d = json.loads(out_file.read_text())
    assert d["coeffs"] == [{"idx": [1, 2], "value": 0.5}]
    code, out, _ = run(["norm", "--input", str(out_file), "--p", "inf"], capsys)
    assert json.loads(out)["poly"]["value"] == pytest.approx(1.0, abs=1e-12)


def test_constants_row(capsys):
    code, out, _ = run(["constants", "--m", "3", "--k", "1", "--p", "1", "--field", "complex"],
                       capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    row = next(r for r in rows if r["name"] == "markov_const_lp")
    assert float(row["value"]) == pytest.approx(6.75, rel=1e-15)
    assert list(rows[0]) == ["name", "m", "k", "p", "r", "value", "anchor"]


def test_extremal_ex2_ratio(capsys):
    code, out, _ = run(["extremal", "--case", "EX2", "--p", "1"], capsys)
    assert code == 0
    d = json.loads(out)
    assert abs(d["ratio"] - 2) <= 1e-3 and d["pass"]


def test_search_k_m2_p1(capsys):
    code, out, _ = run(["search-k", "--m", "2", "--p", "1", "--dim", "2"], capsys)
    assert code == 0
    assert abs(json.loads(out)["ratio"] - 2) <= 1e-3


def test_audit_exit_one_on_failure(monkeypatch, capsys):
    broken = dataclasses.replace(audit.CHECKS["U2"], evaluate=lambda inst, opts: (2.0, 1.0, ()))
    monkeypatch.setitem(audit.CHECKS, "U2", broken)
    code, out, err = run(["audit", "--checks", "U2", "--instances", "2"], capsys)
    assert code == 1
    assert "2 failures" in err
    assert json.loads(out.splitlines()[-1])["summary"]["failures"] == 2


def test_empty_audit_succeeds(capsys):
    code, out, _ = run(["audit", "--checks", "", "--instances", "0", "--format", "csv"], capsys)
    assert code == 0


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["norm", "--input", "/nonexistent/file.json"],
    ["norm", "--input", PRODUCT3, "--p", "0.5"],
    ["norm", "--input", PRODUCT3, "--space", "hxc"],
    ["derivative", "--input", PRODUCT3, "--k", "4"],
    ["derivative", "--input", PRODUCT3, "--x", "[1, 0, 0]"],
    ["derivative", "--input", PRODUCT3, "--x", "[0.1, 0]"],
    ["constants", "--m", "2:1:1"],
    ["constants", "--m", "2.5"],
    ["audit", "--checks", "U1,Z9"],
    ["audit", "--counts", "U7"],
    ["audit", "--restarts", "0"],
    ["extremal", "--case", "EX2", "--p", "3"],
    ["search-k", "--m", "9"],
])
def test_input_errors_exit_two(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2
    assert err.startswith("polyineq: error: ")
    assert err.count("\n") == 1


def test_bad_json_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"field": "real", "order": 2}')
    code, _, err = run(["norm", "--input", str(bad)], capsys)
    assert code == 2 and "missing" in err


def test_seed_environment_variable(monkeypatch, capsys):
    argv = ["audit", "--checks", "U2", "--instances", "1"]
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    base = run(argv, capsys)[1]
    monkeypatch.setenv(cli.SEED_ENV, "7")
    env_out = run(argv, capsys)[1]
    assert env_out != base
    assert run(argv + ["--seed", "7"], capsys)[1] == env_out
    assert run(argv + ["--seed", "42"], capsys)[1] == base
    monkeypatch.setenv(cli.SEED_ENV, "seven")
    assert run(argv, capsys)[0] == 2


def test_audit_output_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    for p in paths:
        assert run(["audit", "--suite", "quick", "--instances", "2", "-o", str(p)], capsys)[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert b"\r" not in paths[0].read_bytes()


def test_parse_grid():
    assert parse_grid("1:2:0.5,inf") == [1.0, 1.5, 2.0, float("inf")]
    assert parse_grid("0:1:0.1", "float")[-1] == 1.0
    assert len(parse_grid("0:1:0.1", "float")) == 11
    assert parse_grid("2:4:1", "int") == [2, 3, 4]
    assert parse_grid("0, 0.5", "float") == [0.0, 0.5]
    for bad, kind in [("", "exponent"), ("1:2", "exponent"), ("a", "float"), ("0.5", "exponent"),
                      ("1:2:0", "float")]:
        with pytest.raises(cli.InputError):
            parse_grid(bad, kind)

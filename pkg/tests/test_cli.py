import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from platerod.cli import PLATE_HEADER, REPORT_HEADER, ROD_HEADER, main

CONFIGS = Path(__file__).parents[1] / "configs"


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


SOLVE_ZERO = """
[regime]
kappa = 3
kappa_prime = 3
delta = 0.01
[discretization]
n1 = 2
n2 = 2
n_r = 4
[output]
plate_samples = [3, 3]
rod_samples = 5
"""


def test_solve_zero_forces(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["solve", "--config", str(write(tmp_path, SOLVE_ZERO)), "--out", str(out)]) == 0
    plate = read_csv(out / "plate_fields.csv")
    assert tuple(plate[0]) == PLATE_HEADER and len(plate) == 10
    assert all(float(x) == 0 for row in plate[1:] for x in row[2:])
    rod = read_csv(out / "rod_fields.csv")
    assert tuple(rod[0]) == ROD_HEADER and all(float(x) == 0 for row in rod[1:] for x in row[1:])
    rep = read_csv(out / "solve_report.csv")
    assert tuple(rep[0]) == REPORT_HEADER and rep[1][0] == "1"
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["run"] == {"command": "solve", "threads": resolved["run"]["threads"]}
    assert resolved["discretization"]["n1"] == 2 and resolved["solver"]["tol"] == 1e-10
    assert not (out / "error.json").exists()


def test_config_error_exit_code_and_record(tmp_path, capsys):
    out = tmp_path / "o"
    (out).mkdir()
    (out / "error.json").write_text("stale")
    code = main(["solve", "--config", str(write(tmp_path, "[regime]\nkappa = 2\n")), "--out", str(out)])
    assert code == 2
    rec = json.loads((out / "error.json").read_text())
    assert rec["exit_code"] == 2 and rec["kind"] == "ConfigError" and rec["command"] == "solve"
    assert any("kappa >= 3" in e for e in rec["errors"])
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1]) == rec


def test_missing_config_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["check", "--config", "absent.toml"]) == 2
    assert json.loads((tmp_path / "out" / "error.json").read_text())["kind"] == "ConfigError"


def test_bad_expression_is_config_error(tmp_path):
    text = SOLVE_ZERO + "[forces]\nf_p = ['0', '0', 'foo(x1)']\n"
    out = tmp_path / "o"
    assert main(["solve", "--config", str(write(tmp_path, text)), "--out", str(out)]) == 2


def test_linear_method_in_critical_regime_is_config_error(tmp_path):
    text = SOLVE_ZERO + "[solver]\nmethod = 'linear'\n"
    assert main(["solve", "--config", str(write(tmp_path, text)), "--out", str(tmp_path / "o")]) == 2


def test_nonconvergence_exit_code(tmp_path):
    text = SOLVE_ZERO.replace("[output]", "[forces]\nf_p = ['0', '0', '5']\n[solver]\nmax_iter = 1\n[output]")
    out = tmp_path / "o"
    assert main(["solve", "--config", str(write(tmp_path, text)), "--out", str(out)]) == 1
    rec = json.loads((out / "error.json").read_text())
    assert rec["kind"] == "NonConvergence" and rec["iterations"] == 1
    assert (out / "solve_report.csv").exists()


def test_threads_flag_and_env(tmp_path, monkeypatch):
    cfg = str(write(tmp_path, SOLVE_ZERO))
    monkeypatch.setenv("PLATEROD_THREADS", "1")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert json.loads((tmp_path / "a" / "resolved_config.json").read_text())["run"]["threads"] == 1
    monkeypatch.setenv("PLATEROD_THREADS", "many")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "b")]) == 2
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "c"), "--threads", "0"]) == 2
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "d"), "--threads", "1"]) == 0


def test_check_command(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["check", "--config", str(CONFIGS / "check.toml"), "--out", str(out)]) == 0
    rows = read_csv(out / "check.csv")
    assert rows[0] == ["suite", "passed", "detail"] and all(r[1] == "1" for r in rows[1:])
    assert "PASS" in capsys.readouterr().out


def test_decompose_command(tmp_path):
    text = ("[regime]\nkappa = 3\nkappa_prime = 3\ndelta = 0.05\n"
            "[decompose]\nu = ['0', '0', '0.1*(x1+1)**2']\nplate_cells = 2\ntilde_resolution = [4, 4]\n")
    out = tmp_path / "o"
    assert main(["decompose", "--config", str(write(tmp_path, text)), "--out", str(out)]) == 0
    rows = read_csv(out / "korn_report.csv")
    assert rows[0] == ["inequality_id", "lhs", "rhs_scale", "ratio"] and len(rows) > 10
    assert main(["decompose", "--config", str(write(tmp_path, text.split("[decompose]")[0], "x.toml")),
                 "--out", str(out)]) == 2


STUDY_SMALL = """
[geometry]
a = 3.0
b = 2.0
c = 1.5
d = 1.5
L = 2.0
[triple]
plate = ["0", "0", "0.1*Piecewise((0, x1 <= -2), (1, x1 >= -1), (10*(x1+2)**3 - 15*(x1+2)**4 + 6*(x1+2)**5, True))"]
rod = ["0.05*x3**2", "0", "0.1 + 0.05*x3", "0.05*x3"]
[forces]
f_p = ["0", "0", "0.5"]
[study]
deltas = [0.2, 0.1]
plate_cells = 2
plate_order = 4
thickness_order = 4
rod_cells = 4
rod_order = 4
disc_radial = 4
disc_angular = 8
"""


def run_twice(tmp_path, command, text, files):
    cfg = str(write(tmp_path, text))
    outs = [tmp_path / "r1", tmp_path / "r2"]
    for o in outs:
        assert main([command, "--config", cfg, "--out", str(o), "--threads", "1"]) == 0
    for f in files:
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    return outs[0]


def test_study_command_and_reproducibility(tmp_path):
    out = run_twice(tmp_path, "study", STUDY_SMALL, ["study.csv", "study_plot.csv", "resolved_config.json"])
    rows = read_csv(out / "study.csv")
    assert len(rows) == 3
    assert float(rows[2][5]) < float(rows[1][5])


def test_solve_reproducibility(tmp_path):
    text = SOLVE_ZERO.replace("[output]", "[forces]\nf_p = ['0.1', '0', '1 + x1*x2']\n"
                                          "f_r = ['0', '0.1', '0.2']\n[output]")
    run_twice(tmp_path, "solve", text, ["plate_fields.csv", "rod_fields.csv", "solve_report.csv"])


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["explode", "--config", "x.toml"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["solve"])


def test_console_script(tmp_path):
    out = tmp_path / "o"
    p = subprocess.run([sys.executable, "-m", "platerod.cli", "solve", "--config", str(write(tmp_path, SOLVE_ZERO)),
                        "--out", str(out)], capture_output=True, text=True)
    assert p.returncode == 0, p.stderr
    p = subprocess.run([sys.executable, "-m", "platerod.cli", "solve", "--config", str(tmp_path / "missing.toml"),
                        "--out", str(out)], capture_output=True, text=True)
    assert p.returncode == 2 and json.loads(p.stderr.strip().splitlines()[-1])["exit_code"] == 2

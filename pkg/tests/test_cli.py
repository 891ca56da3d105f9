import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from nilsphere.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--reproducible")
    return code, json.loads(out)


def quantity(rep, name):
    return next(q["value"] for q in rep["quantities"] if q["name"] == name)


def test_eval_identity(capsys):
    code, rep = run_json(capsys, "eval", "--p", "2", "--lambda", "1.5", "--l", "2", "--r", "0", "--point", "0,0,0")
    assert code == EXIT_OK
    assert rep["points"][0]["value"] == {"re": 1.0, "im": 0.0}
    assert rep["schema"] == 1
    assert set(rep) == {"schema", "command", "config", "seed", "versions", "quantities", "points"}
    assert rep["config"]["lambda"] == [1.5]
    assert {"nilsphere", "numpy", "scipy", "python", "backend"} <= set(rep["versions"])


def test_eval_matches_closed_form(capsys):
    code, rep = run_json(capsys, "eval", "--p", "2", "--lambda", "1.0", "--l", "1", "--point", "0.5,0.2,0.3",
                         "--point", "1,0,0")
    assert code == EXIT_OK
    v0 = rep["points"][0]["value"]["re"]
    x2 = 0.29
    assert abs(v0 - np.cos(0.3) * (1 - x2 / 2) * np.exp(-x2 / 4)) <= 1e-10
    assert len(rep["points"]) == 2


def test_timestamp_only_without_reproducible(capsys):
    code, out, _ = run(capsys, "canonical", "--matrix", "[[0,1],[-1,0]]")
    assert code == EXIT_OK
    assert "timestamp" in json.loads(out)


def test_canonical(capsys):
    code, rep = run_json(capsys, "canonical", "--matrix", "[[0,3],[-3,0]]")
    assert code == EXIT_OK
    assert quantity(rep, "Lambda") == [3.0]
    assert quantity(rep, "conjugation_residual") <= 1e-12


def test_verify_bessel(capsys):
    code, rep = run_json(capsys, "verify-bessel", "--p", "3", "--samples", "200000", "--seed", "7")
    assert code == EXIT_OK and rep["status"] == "PASS"
    assert len(rep["points"]) == 20
    for row in rep["points"]:
        assert row["error"] < 5 * row["std_error"]


@pytest.mark.parametrize("argv", [
    ("--p", "2", "--lambda", "1", "--l", "2"),
    ("--p", "3", "--r", "1.2"),
    ("--p", "5", "--r", "0.7"),
    ("--p", "4", "--lambda", "2,2", "--l", "1"),
    ("--p", "3", "--lambda", "1.5", "--l", "1", "--r", "0.5"),
])
def test_verify_eigen_pass(capsys, argv):
    code, rep = run_json(capsys, "verify-eigen", *argv, "--seed", "3")
    assert code == EXIT_OK and rep["status"] == "PASS"


def test_verify_functional_and_oracle(capsys):
    code, rep = run_json(capsys, "verify-functional", "--p", "2", "--lambda", "1.3", "--l", "2", "--seed", "1")
    assert code == EXIT_OK and rep["status"] == "PASS"
    code, rep = run_json(capsys, "verify-oracle", "--p", "2", "--lambda", "0.8", "--l", "3", "--seed", "1",
                         "--points", "10")
    assert code == EXIT_OK and rep["status"] == "PASS"
    code, rep = run_json(capsys, "verify-oracle", "--p", "3", "--lambda", "1.0", "--l", "1", "--r", "0.4",
                         "--seed", "1", "--points", "5", "--samples", "20000")
    assert code == EXIT_OK and rep["status"] == "PASS"


def test_calibrate_and_plancherel(capsys):
    code, rep = run_json(capsys, "calibrate-c", "--p", "2")
    assert code == EXIT_OK and abs(quantity(rep, "c") - 2) <= 1e-8
    code, rep = run_json(capsys, "plancherel", "--p", "2")
    assert code == EXIT_OK and rep["status"] == "PASS"
    assert quantity(rep, "c_p_stated") == 1.0
    assert quantity(rep, "matches_stated_c_p") is False


@pytest.mark.parametrize("argv", [
    ("eval", "--p", "2", "--lambda", "-1", "--l", "0", "--point", "0,0,0"),
    ("eval", "--p", "2", "--lambda", "1", "--l", "0", "--point", "0,0"),
    ("verify-bessel", "--p", "3", "--samples", "1000"),
    ("canonical", "--matrix", "[[0,1]]"),
    ("canonical", "--matrix", "not json"),
    ("frobnicate",),
    ("eval", "--p", "two", "--point", "0"),
    ("verify-functional", "--p", "3", "--r", "1"),
    ("plancherel", "--p", "3"),
    ("verify-bessel", "--p", "2", "--seed", str(2 ** 64)),
])
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert out == ""
    diag = json.loads(err)
    assert diag["error"] == "usage" and diag["exit_code"] == EXIT_USAGE


def test_fail_exit_code(capsys):
    code, rep = run_json(capsys, "verify-eigen", "--p", "2", "--lambda", "1", "--l", "1", "--step", "1.5",
                         "--point", "0.3,0.2,0.1")
    assert code == EXIT_FAIL and rep["status"] == "FAIL"


def test_budget_exit_code(capsys):
    code, out, err = run(capsys, "calibrate-c", "--p", "3", "--samples", "12", "--seed", "1")
    assert code == EXIT_BUDGET and out == ""
    assert json.loads(err)["error"] == "budget"


def test_reproducible_bytes(capsys):
    argv = ("eval", "--p", "3", "--lambda", "1", "--l", "1", "--r", "0.3", "--samples", "5000", "--seed", "99",
            "--point", "0.1,0.2,0.3,0.4,0.5,0.6", "--point", "1,0,0,0,0,0", "--reproducible")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    _, c, _ = run(capsys, *argv[:-3], "100", *argv[-2:])
    assert c != a


def test_thread_count_does_not_change_output(monkeypatch, capsys):
    argv = ("tabulate", "--p", "3", "--lambda", "1", "--l", "1", "--samples", "2000", "--seed", "5",
            "--num", "9", "--output", "json", "--reproducible")
    monkeypatch.setenv("NILSPHERE_THREADS", "1")
    _, a, _ = run(capsys, *argv)
    monkeypatch.setenv("NILSPHERE_THREADS", "4")
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_tabulate_csv(capsys):
    code, out, _ = run(capsys, "tabulate", "--p", "2", "--lambda", "1", "--l", "0", "--num", "5", "--stop", "2",
                       "--reproducible")
    assert code == EXIT_OK
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    assert rows[0] == ["c0", "c1", "c2", "value_re", "value_im", "std_error"]
    assert len(rows) == 6
    x = np.array([float(r[0]) for r in rows[1:]])
    v = np.array([float(r[3]) for r in rows[1:]])
    assert np.allclose(x, np.linspace(0, 2, 5))
    assert np.allclose(v, np.exp(-x ** 2 / 4), atol=1e-10)
    assert "# schema: 1" in out and "timestamp" not in out


def test_console_script_entry_point():
    env = dict(os.environ)
    res = subprocess.run([sys.executable, "-m", "nilsphere.cli", "canonical", "--matrix", "[[0,-2],[2,0]]",
                          "--reproducible"], capture_output=True, text=True, env=env, check=False)
    assert res.returncode == 0
    assert quantity(json.loads(res.stdout), "Lambda") == [2.0]

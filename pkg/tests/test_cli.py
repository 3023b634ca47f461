from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from pforge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_numeric_suite_passes(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--suite", "numeric", "--json-out", str(path))
    assert code == 0
    rep = json.loads(path.read_text())
    assert rep["schema"] == 1 and rep["tool"] == "pforge" and rep["suite"] == "numeric"
    assert set(rep) >= {"version", "timestamp", "settings", "summary", "elapsed_ms", "checks", "errata"}
    assert rep["summary"]["total"] == len(rep["checks"]) == 6
    assert rep["summary"]["fail"] == 0
    for c in rep["checks"]:
        assert set(c) >= {"name", "suite", "topic", "status", "details", "elapsed_ms"}
        assert c["status"] in ("pass", "fail", "erratum")
        assert c["name"] in out


def test_report_is_stable_across_runs(capsys, tmp_path):
    reps = []
    for i in range(2):
        p = tmp_path / f"r{i}.json"
        run(capsys, "verify", "--suite", "weyl", "--json-out", str(p))
        reps.append(json.loads(p.read_text()))
    key = lambda r: [(c["name"], c["status"]) for c in r["checks"]]
    assert key(reps[0]) == key(reps[1])
    assert reps[0]["summary"] == reps[1]["summary"]


def test_full_run_reports_errata_without_failing(capsys, tmp_path):
    p = tmp_path / "all.json"
    code, out, _ = run(capsys, "verify", "--json-out", str(p))
    rep = json.loads(p.read_text())
    assert code == 0
    assert rep["summary"]["fail"] == 0 and rep["summary"]["erratum"] >= 1
    assert rep["errata"] and all("check" in e for e in rep["errata"])
    assert "checks:" in out.splitlines()[-1]


def test_failing_check_gives_exit_one(capsys, monkeypatch):
    monkeypatch.setenv("PFORGE_EXP_TOL", "1e-300")
    code, out, _ = run(capsys, "verify", "--suite", "numeric")
    assert code == 1
    assert "FAIL     numeric.exponential" in out


def test_env_and_flag_overrides_reach_the_report(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("PFORGE_RTOL", "1e-9")
    p = tmp_path / "r.json"
    run(capsys, "verify", "--suite", "numeric", "--atol", "1e-13", "--json-out", str(p))
    s = json.loads(p.read_text())["settings"]
    assert s["rtol"] == 1e-9 and s["atol"] == 1e-13


@pytest.mark.parametrize("argv", [
    ["verify", "--suite", "nope"],
    [],
    ["integrate", "--system", "nope", "--init", "1"],
    ["integrate", "--system", "sys3", "--params", "alpha=0", "--init", "1,2"],
    ["integrate", "--system", "sys3", "--init", "0,1,0,0"],
    ["integrate", "--system", "sys3", "--params", "beta=1", "--init", "0,1,0,0"],
    ["integrate", "--system", "sys3", "--params", "alpha=0", "--init", "a,b,c,d"],
    ["integrate", "--system", "mapA3", "--init", "1"],
])
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_bad_environment_value_is_an_error(capsys, monkeypatch):
    monkeypatch.setenv("PFORGE_RTOL", "tight")
    code, _, err = run(capsys, "verify", "--suite", "numeric")
    assert code == 2 and "PFORGE_RTOL" in err


def test_integrate_writes_csv(capsys, tmp_path):
    out = tmp_path / "traj.csv"
    code, text, _ = run(capsys, "integrate", "--system", "sys3", "--params", "alpha=0",
                        "--init", "0,1,0,0", "--t1", "1", "--out", str(out))
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "q1", "p1", "q2", "p2"]
    assert float(rows[-1][0]) == 1.0
    assert abs(float(rows[-1][1]) - 0.169843132735011) < 1e-7
    assert "termination: reached_end" in text


def test_integrate_two_time_reports_drift(capsys):
    code, out, err = run(capsys, "integrate", "--system", "A1", "--params", "a0=1/4,a1=-1/2",
                         "--init=-1,-1/3,2/9,1/4", "--flow", "s", "--t1", "1")
    assert code == 0
    assert out.splitlines()[0].split(",")[0] == "s"
    drifts = [ln for ln in err.splitlines() if ln.startswith("drift")]
    assert len(drifts) == 2
    assert all(float(ln.split()[-1]) < 1e-8 for ln in drifts)


def test_integrate_warns_on_relation_violation(capsys):
    code, _, err = run(capsys, "integrate", "--system", "A1", "--params", "a0=1,a1=1",
                       "--init=-1,-1/3,2/9,1/4", "--t1", "1/10")
    assert code == 0
    assert "warning" in err


def test_integrate_pole_exits_one(capsys):
    code, _, err = run(capsys, "integrate", "--system", "sys3", "--params", "alpha=0",
                       "--init", "1,0,0,0", "--t1", "5")
    assert code == 1
    assert "pole_detected" in err


def test_list_and_filter(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    assert "sys11 (dim 5, relation 2*a0+a1=1)" in out
    assert "A1 (two-time, relation 2*a0+a1=0)" in out
    code, out, _ = run(capsys, "list", "s0.")
    assert out and all(ln.startswith("s0.") for ln in out.splitlines())
    code, out, _ = run(capsys, "list", "sys3", "--json")
    data = json.loads(out)
    assert "sys3" in data


def test_console_script_module_entry():
    proc = subprocess.run([sys.executable, "-m", "pforge.cli", "list", "H4"], capture_output=True, text=True)
    assert proc.returncode == 0 and "H4" in proc.stdout

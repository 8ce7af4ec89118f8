import json
import subprocess
import sys

import numpy as np
import pytest

from nogo.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv, expect_code=0):
    code, out, err = run(capsys, *argv)
    assert code == expect_code, err
    return json.loads(out)


def test_report_shape(capsys):
    r = report(capsys, "joint-spectrum", "bundled:jspec-three")
    assert set(r) == {"command", "inputs", "verdict", "seed", "tool_version"}
    assert r["verdict"]["points"] == [[0, 0, 1], [0, 1, 0], [1, 0, 0]]
    assert len(r["inputs"]["digest"]) == 64


def test_joint_spectrum_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "joint-spectrum", str(bad))[0] == 1
    empty = tmp_path / "empty.json"
    empty.write_text('{"operators": []}')
    assert run(capsys, "joint-spectrum", str(empty))[0] == 1
    nc = tmp_path / "nc.json"
    nc.write_text(json.dumps({"operators": [[[0, 1], [1, 0]], [[1, 0], [0, -1]]]}))
    code, _, err = run(capsys, "joint-spectrum", str(nc))
    assert code == 2 and '"pair": [0, 1]' in err
    assert run(capsys, "joint-spectrum", str(tmp_path / "missing.json"))[0] == 1


def test_ks_check(capsys, tmp_path):
    r = report(capsys, "ks-check", "bundled:cabello18", "--method", "both")
    assert r["verdict"]["result"] == "NONE" and r["verdict"]["clauses"]["exactly_one"] == 9
    r = report(capsys, "ks-check", "bundled:standard3")
    assert r["verdict"]["result"] == "assignment" and sum(r["verdict"]["assignment"]) == 1
    code, out, _ = run(capsys, "ks-check", "bundled:peres33", "--budget", "10")
    assert code == 4 and json.loads(out)["verdict"]["result"] == "BUDGET"
    cat = tmp_path / "wrong.json"
    cat.write_text(json.dumps({"dim": 3, "rays": np.eye(3).tolist(), "expect": "uncolorable"}))
    assert run(capsys, "ks-check", str(cat))[0] == 3


def test_ks_lift(capsys, tmp_path):
    out = tmp_path / "lift.json"
    r = report(capsys, "ks-lift", "bundled:peres33", "--target-dim", "4", "--output", str(out))
    assert r["verdict"]["size_bound_ok"] and r["verdict"]["dim"] == 4
    r2 = report(capsys, "ks-check", str(out))
    assert r2["verdict"]["result"] == "NONE"
    assert run(capsys, "ks-lift", "bundled:standard3", "--target-dim", "4")[0] == 2


def test_bell(capsys):
    r = report(capsys, "bell", "--n", "0,0,1", "--obs", "sz", "--samples", "1000")
    assert r["verdict"]["exact"] == 1.0 and r["verdict"]["monte_carlo"]["mean"] == 1.0
    assert run(capsys, "bell", "--n", "0,0,2")[0] == 1
    assert run(capsys, "bell", "--obs", "bogus")[0] == 1


def test_bell_moments(capsys):
    r = report(capsys, "bell-moments", "--samples", "4096")
    v = r["verdict"]
    assert v["same_state"] is True and v["moment_gap_norm"] == pytest.approx(1.0)
    assert np.allclose(v["pm_x"]["exact"], np.diag([4, 1, 1]) / 3)
    assert np.allclose(v["pm_z"]["monte_carlo"], np.diag([1, 1, 4]) / 3, atol=1e-2)


def test_coexist(capsys):
    v = report(capsys, "coexist")["verdict"]
    assert v["margin"] < -0.1 and v["coexist"] is False
    assert v["witness"]["min_eigenvalue"] == pytest.approx(-1 / np.sqrt(2))
    v = report(capsys, "coexist", "--pair", "custom", "--a", "0,0,1", "--b", "0,0,-1")["verdict"]
    assert abs(v["margin"]) <= 1e-9 and v["coexist"] is True
    assert run(capsys, "coexist", "--pair", "custom")[0] == 1


def test_spekkens_refute(capsys):
    v = report(capsys, "spekkens-refute", "bundled:candidate")["verdict"]
    assert v["verify"]["violated"] == "E2" and v["confirmed"]
    v = report(capsys, "spekkens-refute", "--quantum", "40", "--seed", "3")["verdict"]
    assert v["verify"] != "PASS"
    assert run(capsys, "spekkens-refute")[0] == 1


def test_extend(capsys):
    v = report(capsys, "extend", "bundled:points-one")["verdict"]
    assert v["w0"] == [1.0] and np.allclose(v["h"], 0)
    v = report(capsys, "extend", "bundled:points-affine")["verdict"]
    assert np.allclose(v["h"], [[3, 2]]) and np.allclose(v["offset"], [-1])


def test_text_format(capsys):
    code, out, _ = run(capsys, "--format", "text", "extend", "bundled:points-one")
    assert code == 0 and 'verdict.result: "translated_linear"' in out


def test_determinism_and_seed_env(capsys, monkeypatch):
    argv = ("bell", "--n", "1,0,0", "--obs", "0.2,0.1,0.3,-0.4", "--samples", "5000", "--seed", "11")
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    assert a == b
    monkeypatch.setenv("NOGO_SEED", "11")
    c = run(capsys, *argv[:-2])[1]
    assert json.loads(c)["seed"] == 11 and json.loads(c)["verdict"] == json.loads(a)["verdict"]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nogo.cli", "ks-check", "bundled:cabello18"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["verdict"]["result"] == "NONE"

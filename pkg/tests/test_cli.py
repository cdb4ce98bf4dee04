import csv
import json

import pytest

from cdflow import __version__
from cdflow.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constants_json(capsys):
    code, out, _ = run(capsys, "constants", "--name", "c_phi", "--n", "1", "--beta", "3")
    assert code == 0
    rep = json.loads(out)
    assert rep["value"] == 3.0625 and rep["version"] == __version__
    assert rep["config"]["name"] == "c_phi"


def test_constants_sweep_csv(capsys, tmp_path):
    path = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "constants", "--sweep", "n=-10:-2.1:0.1", "--name", "p_star", "--csv", str(path))
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["n", "p_star", "valid"] and len(rows) == 1 + 80
    assert float(rows[1][1]) == pytest.approx(1 + 41 / 201)


def test_certify(capsys):
    code, out, _ = run(capsys, "certify", "--family", "quadratic", "--beta", "2", "--rho", "3", "--n", "-2")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "certified"
    assert {"min_slack", "argmin_x", "grid", "seed", "config"} <= set(rep)


def test_forbidden_dimension_exit_code(capsys):
    code, _, err = run(capsys, "certify", "--n", "0.5", "--rho", "1")
    assert code == 2 and "[0, 1]" in err


def test_usage_error(capsys):
    code, _, err = run(capsys, "certify", "--rho", "1")
    assert code == 2 and "--n" in err


def test_numerical_failure_exit_code(capsys):
    code, _, err = run(capsys, "flow", "--entropy", "power", "--p", "1.8", "--init", "x", "--t-end", "0.01")
    assert code == 3 and "positive" in err


def test_frontier_quartic(capsys):
    code, out, _ = run(capsys, "frontier", "--family", "quartic", "--beta", "2")
    rep = json.loads(out)
    assert code == 0 and rep["best_constant"] >= 3.5 - 1e-9


def test_flow_outputs(capsys, tmp_path):
    path = tmp_path / "trace.csv"
    argv = ["flow", "--beta", "3", "--entropy", "variance", "--init", "x", "--t-end", "0.2", "--K", "4", "--csv", str(path)]
    code, out, _ = run(capsys, *argv)
    rep = json.loads(out)
    assert code == 0 and rep["decay_ok"] and rep["refined_ok"] and "min_residual" in rep
    header = next(csv.reader(path.open()))
    assert header == ["t", "lambda", "lambda1", "lambda2", "residual_linear", "residual_refined", "mass"]


def test_gap(capsys):
    code, out, _ = run(capsys, "gap", "--family", "quadratic", "--beta", "3")
    assert code == 0 and json.loads(out)["gap"] == pytest.approx(4.0, rel=1e-2)


def test_beckner_deterministic(capsys, tmp_path):
    argv = ["beckner", "--beta", "3", "--p", "1.8", "--trials", "100", "--seed", "42"]
    outs, quotients = [], []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        assert main(argv + ["--json", str(path), "--csv", str(tmp_path / "q.csv")]) == 0
        outs.append(path.read_bytes())
        quotients.append((tmp_path / "q.csv").read_bytes())
    assert outs[0] == outs[1] and quotients[0] == quotients[1]
    rep = json.loads(outs[0])
    assert rep["violations"] == 0 and rep["seed"] == 42

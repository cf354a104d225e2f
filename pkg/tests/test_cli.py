import csv
import io
import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from spinframes import __version__
from spinframes.cli import EXIT_USAGE, EXIT_VERIFY, SWEEP_COLUMNS, main
from spinframes.spectral import optimal_protocol


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def run_json(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    return json.loads(out)


def csv_rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# spinframes ")
    return list(csv.reader(lines[1:]))


def schema(command):
    path = resources.files("spinframes") / "schemas" / f"{command}.schema.json"
    return json.loads(path.read_text())


# --- optimize ----------------------------------------------------------------


def test_optimize_json(capsys):
    doc = run_json(["optimize", "--n", "3"], capsys)
    res = doc["result"]
    assert doc["version"] == __version__
    assert res["lambda"] == optimal_protocol(3).eigenvalue
    assert res["avg_error"] == pytest.approx(6 - 2 * res["lambda"])
    assert res["sigma_N"] == pytest.approx(1.0)
    assert res["sigma_N+2"] == pytest.approx(2.0)
    assert [c["j"] for c in res["coefficients"]] == ["3/2", "1/2"]
    assert sum(c["A"] ** 2 for c in res["coefficients"]) == pytest.approx(1)
    assert res["d_max"] == 8
    jsonschema.validate(doc, schema("optimize"))


def test_optimize_rejects_n1(capsys):
    code, out, err = run(["optimize", "--n", "1"], capsys)
    assert code == EXIT_USAGE
    assert "N must be >= 2" in err
    assert out == ""


def test_optimize_csv(capsys):
    code, out, _ = run(["optimize", "--n", "9", "--format", "csv"], capsys)
    assert code == 0
    rows = csv_rows(out)
    assert rows[0][:3] == ["N", "lambda", "avg_error"]
    assert float(rows[1][1]) == pytest.approx(optimal_protocol(9).eigenvalue, rel=1e-9)


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as info:
        main(["optimize"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == EXIT_USAGE
    code, _, _ = run(["sweep", "--n-min", "10", "--n-max", "5"], capsys)
    assert code == EXIT_USAGE


# --- sweep -------------------------------------------------------------------


def test_sweep_csv_header_and_sandwich(capsys):
    code, out, _ = run(["sweep", "--n-min", "4", "--n-max", "200", "--format", "csv"], capsys)
    assert code == 0
    rows = csv_rows(out)
    assert ",".join(rows[0]) == "N,lambda,avg_error,ratio,sigma_lo,sigma_hi,sandwich_ok"
    assert rows[0] == SWEEP_COLUMNS
    assert len(rows) == 1 + 197
    assert all(r[-1] == "true" for r in rows[1:])


def test_sweep_ratio_approaches_one(capsys):
    doc = run_json(["sweep", "--n-min", "20", "--n-max", "200"], capsys)
    ratios = [r["ratio"] for r in doc["result"]]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert all(r < 1 for r in ratios)
    N = 200
    assert ratios[-1] == pytest.approx((6 - 2 * optimal_protocol(N).eigenvalue) * N**2 / (8 * math.pi**2))
    jsonschema.validate(doc, schema("sweep"))


def test_sweep_step(capsys):
    doc = run_json(["sweep", "--n-min", "5", "--n-max", "15", "--step", "5"], capsys)
    assert [r["N"] for r in doc["result"]] == [5, 10, 15]


# --- simulate ----------------------------------------------------------------


def test_simulate_consistent_with_analytic(capsys):
    doc = run_json(["simulate", "--n", "3", "--trials", "100000", "--seed", "7"], capsys)
    res = doc["result"]
    assert res["z_score"] < 4
    assert res["seed"] == 7 and doc["config"]["seed"] == 7
    assert res["analytic_error"] == pytest.approx(6 - 2 * optimal_protocol(3).eigenvalue)
    jsonschema.validate(doc, schema("simulate"))


def test_simulate_byte_identical(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        assert main(["simulate", "--n", "4", "--trials", "2000", "--seed", "3", "-o", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    # the worker count never changes the bytes
    path = tmp_path / "pool.json"
    assert main(["simulate", "--n", "4", "--trials", "12000", "--seed", "3", "-o", str(path), "--workers", "2"]) == 0
    assert main(["simulate", "--n", "4", "--trials", "12000", "--seed", "3", "-o", str(tmp_path / "s.json")]) == 0
    assert path.read_bytes() == (tmp_path / "s.json").read_bytes()


def test_rerun_from_embedded_argv(capsys):
    code, first, _ = run(["simulate", "--n", "2", "--trials", "500", "--seed", "11"], capsys)
    assert code == 0
    argv = json.loads(first)["config"]["argv"]
    code, second, _ = run(argv, capsys)
    assert code == 0 and second == first
    code, csv_first, _ = run(["sweep", "--n-min", "4", "--n-max", "8", "--format", "csv"], capsys)
    meta = json.loads(csv_first.splitlines()[0].split(" ", 3)[3])
    code, csv_second, _ = run(meta["argv"], capsys)
    assert csv_second == csv_first


def test_simulate_limits(capsys):
    code, _, err = run(["simulate", "--n", "12"], capsys)
    assert code == EXIT_USAGE
    assert "sampler limited to N <= 10" in err
    code, _, _ = run(["simulate", "--n", "3", "--trials", "50"], capsys)
    assert code == EXIT_USAGE


# --- verify ------------------------------------------------------------------


def test_verify_n3(capsys):
    doc = run_json(["verify", "--n", "3", "--grid", "32"], capsys)
    res = doc["result"]
    assert res["all_passed"]
    residuals = [c["value"] for c in res["checks"] if c["name"] != "povm_completeness_negative_control"]
    assert max(residuals) < 1e-6
    jsonschema.validate(doc, schema("verify"))


def test_verify_n2_matrix(capsys):
    res = run_json(["verify", "--n", "2", "--grid", "32"], capsys)["result"]
    Mq = res["M_quadrature"]
    s = 1 / math.sqrt(3)
    for got, want in zip(sum(Mq, []), [0.5, s, s, 0.0]):
        assert got == pytest.approx(want, abs=1e-6)


def test_verify_limit(capsys):
    code, _, err = run(["verify", "--n", "7"], capsys)
    assert code == EXIT_USAGE
    assert "oracle limited to N <= 6" in err


def test_verify_csv(capsys):
    code, out, _ = run(["verify", "--n", "5", "--format", "csv"], capsys)
    assert code == 0
    rows = csv_rows(out)
    assert rows[0] == ["name", "value", "threshold", "passed", "detail"]
    assert all(r[3] == "true" for r in rows[1:])


def test_verify_failure_exit_code(monkeypatch, capsys):
    from spinframes import cli
    from spinframes.oracle import OracleCheck

    monkeypatch.setattr(cli, "run_all", lambda N, grid, seed=0: [OracleCheck("x", 1.0, 0.5, False)])
    code, _, err = run(["verify", "--n", "5"], capsys)
    assert code == EXIT_VERIFY
    assert "x" in err


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "spinframes", "optimize", "--n", "2", "--format", "csv"],
        capture_output=True,
        text=True,
        check=True,
    ).stdout
    rows = list(csv.reader(io.StringIO(out.split("\n", 1)[1])))
    assert int(rows[1][0]) == 2

import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from stablehit.cli import UsageError, parse_grid, run

ORACLE = json.loads((Path(__file__).parent / "fixtures" / "oracle_values.json").read_text())
BASE = ["--alpha", "1.5", "--rho", "0.55"]


def _run(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_alpha_out_of_range_exits_2(capsys):
    code, out, err = _run(capsys, ["survival", "--alpha", "2.5", "--rho", "0.5", "--x", "1", "--t", "1"])
    assert code == 2 and out == ""
    assert "1 < alpha < 2" in err


def test_survival_csv_matches_oracle(capsys):
    code, out, _ = _run(capsys, ["survival", "--alpha", "1.5", "--rho", "0.5", "--x", "1", "--t", "1"])
    assert code == 0
    assert out.splitlines()[0] == "x,t,value,abs_err,constant_used"
    row = _rows(out)[0]
    assert float(row["value"]) == pytest.approx(ORACLE["survival_alpha1.5_theta0_x1_t1"], abs=1e-10)


def test_survival_json_schema(capsys):
    code, out, _ = _run(capsys, ["survival", *BASE, "--x", "1", "--t-grid", "1,2", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "stablehit.survival/1"
    assert doc["columns"] == ["x", "t", "value", "abs_err", "constant_used"]
    assert doc["meta"]["constant_mode"] == "calibrated" and doc["meta"]["rho"] == 0.55
    assert len(doc["rows"]) == 2 and doc["rows"][0][2] > doc["rows"][1][2]


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1.5\nrho = 0.55  # asymmetric\nx = 1\n")
    _, from_cfg, _ = _run(capsys, ["survival", "--config", str(cfg), "--t", "1"])
    _, direct, _ = _run(capsys, ["survival", *BASE, "--x", "1", "--t", "1"])
    assert from_cfg == direct
    _, overridden, _ = _run(capsys, ["survival", "--config", str(cfg), "--t", "1", "--x", "2"])
    assert _rows(overridden)[0]["x"] == "2.0"


def test_usage_errors_exit_2(capsys):
    assert _run(capsys, ["survival", *BASE, "--x", "1", "--t", "1", "--t-grid", "1,2"])[0] == 2
    assert _run(capsys, ["survival", *BASE, "--x", "1", "--t", "1", "--threads", "0"])[0] == 2
    assert _run(capsys, ["eigen", *BASE])[0] == 2
    assert _run(capsys, ["nonsense"])[0] == 2


def test_eigen_csv(capsys):
    code, out, _ = _run(capsys, ["eigen", *BASE, "--x=-1,1"])
    assert code == 0
    rows = _rows(out)
    assert [r["x"] for r in rows] == ["-1.0", "1.0"]
    assert all(float(r["G"]) > 0 for r in rows)


def test_density_and_resolvent(capsys):
    code, out, _ = _run(capsys, ["density", *BASE, "--x", "1", "--t-grid", "1,2"])
    assert code == 0 and len(_rows(out)) == 2
    code, out, _ = _run(capsys, ["resolvent", *BASE, "--lam", "1", "--x", "1", "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert 0 < doc["rows"][0][-1] < 1


def test_spectral_check_report(capsys):
    code, out, _ = _run(capsys, ["spectral-check", *BASE, "--pair", "right-left", "--lam", "1", "--s", "1"])
    assert code == 0
    doc = json.loads(out)
    cut = doc["cut"][0]
    assert max(abs(v) for k, v in cut.items() if k not in ("s", "K", "L")) < 1e-10


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.csv"
    code, out, _ = _run(capsys, ["resolvent", *BASE, "--lam", "1", "--x", "1", "-o", str(target)])
    assert code == 0 and out == ""
    assert target.read_text().startswith("lambda,x,u_lambda,hitting_laplace")


def test_parse_grid():
    assert parse_grid("1, 2,3") == [1.0, 2.0, 3.0]
    assert parse_grid("lin:0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid("geom:1:100:3") == pytest.approx([1.0, 10.0, 100.0])
    with pytest.raises(UsageError):
        parse_grid("a,b")
    with pytest.raises(UsageError):
        parse_grid("lin:0:1:0")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "stablehit.cli", "resolvent", *BASE, "--lam", "1", "--x", "1"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert proc.stdout.startswith("lambda,x")

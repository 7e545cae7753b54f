import csv
import json
import subprocess
import sys

import pytest

from finitewidth.cli import run_cli


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_predict(capsys):
    assert run_cli(["predict", "--width", "128", "--activation", "relu", "--init", "glorot_uniform", "--x", "1"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["sigma2_pred"] == pytest.approx(2 * 128 / 129**2, rel=1e-14)
    assert rec["alpha_pred"] == pytest.approx(-0.0011328125, rel=1e-12)
    assert rec["method"] == "closed_form"


def test_predict_tanh_uses_quadrature(capsys):
    assert run_cli(["predict", "--activation", "tanh", "--x", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["method"] == "quadrature"


def test_simulate_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    assert run_cli(["simulate", "--width", "16", "--samples", "60000", "--seed", "3", "--out", str(out)]) == 0
    doc = json.loads((out / "run.json").read_text())
    assert set(doc) == {"spec", "summary", "fit", "oracle", "tool_version", "wall_time_seconds"}
    assert doc["spec"]["width"] == 16 and doc["spec"]["n_samples"] == 60000
    assert doc["summary"]["count"] == 60000
    assert doc["summary"]["ecdf"]["cumulative"][-1] + doc["summary"]["ecdf"]["overflow"] == 60000
    assert doc["fit"]["c4_std"] == pytest.approx(doc["fit"]["alpha"] * 16)
    rows = read_csv(out / "fig1.csv")
    assert rows[0] == ["z", "ecdf_diff", "model_diff"]
    assert all(abs(float(r[0])) <= 5 for r in rows[1:])
    assert read_csv(out / "ecdf_diff.csv")[0] == ["z", "ecdf_diff"]
    assert "alpha=" in capsys.readouterr().out


def test_simulate_independent_of_threads(tmp_path):
    docs = []
    for threads in (1, 8):
        out = tmp_path / f"t{threads}"
        assert run_cli(["simulate", "--width", "8", "--samples", "200000", "--seed", "5",
                        "--threads", str(threads), "--out", str(out)]) == 0
        doc = json.loads((out / "run.json").read_text())
        del doc["wall_time_seconds"]
        docs.append(json.dumps(doc, indent=2))
        docs.append((out / "fig1.csv").read_bytes())
    assert docs[0] == docs[2]
    assert docs[1] == docs[3]


def test_config_file_with_override(tmp_path, capsys):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"width": 32, "activation": "identity", "init_hidden": "glorot_uniform",
                               "init_output": {"kind": "normal", "std": 0.5}, "x": 2.0}))
    assert run_cli(["predict", "--config", str(cfg), "--width", "64"]) == 0
    rec = json.loads(capsys.readouterr().out)
    # identity, u ~ U(+-a), a^2 = 6/65; v ~ N(0, 0.25)
    assert rec["sigma2_pred"] == pytest.approx(64 * 0.25 * (6 / 65 / 3) * 4, rel=1e-12)


def test_sweep(tmp_path):
    out = tmp_path / "sweep"
    assert run_cli(["sweep", "--widths", "8:24:8", "--samples", "60000", "--seed", "1", "--out", str(out)]) == 0
    rows = read_csv(out / "fig2.csv")
    assert rows[0] == ["width", "alpha_abs", "alpha_sign", "pred_alpha_abs"]
    assert [r[0] for r in rows[1:]] == ["8", "16", "24"]
    assert all(r[2] in ("1", "-1") for r in rows[1:])
    doc = json.loads((out / "sweep.json").read_text())
    assert len(doc["fits"]) == 3
    assert set(doc["power_law"]) == {"exponent", "log_prefactor", "r_squared"}


def test_sweep_empty_range(tmp_path, capsys):
    assert run_cli(["sweep", "--widths", "20:10:2", "--samples", "1000", "--out", str(tmp_path)]) == 1
    assert "no fit points" in capsys.readouterr().err


def test_rg(tmp_path, capsys):
    assert run_cli(["rg", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "rg.csv")
    assert rows[0] == ["n", "lambda_measured", "lambda_expected", "abs_error"]
    assert [int(r[0]) for r in rows[1:]] == list(range(7))
    assert all(float(r[3]) <= 1e-3 for r in rows[1:])
    assert capsys.readouterr().out.startswith("n,lambda_measured")


@pytest.mark.parametrize("argv", [
    ["simulate", "--samples", "0"],
    ["simulate", "--width", "0"],
    ["simulate", "--init", "uniform:-1"],
    ["simulate", "--threads", "0"],
    ["predict", "--activation", "sigmoid"],
    ["predict", "--x", "nan"],
    ["sweep", "--widths", "8-16"],
    ["rg", "--epsilon", "0.5"],
    ["rg", "--points", "1000"],
    ["bogus"],
    [],
])
def test_usage_errors_exit_2(argv, tmp_path, capsys):
    assert run_cli(argv + (["--out", str(tmp_path)] if argv and argv[0] in ("simulate", "sweep", "rg") else [])) == 2
    assert "usage" in capsys.readouterr().err


def test_usage_error_writes_nothing(tmp_path):
    out = tmp_path / "never"
    assert run_cli(["simulate", "--samples", "-5", "--out", str(out)]) == 2
    assert not out.exists()


def test_runtime_error_exit_1(capsys):
    # x = 0 makes every output exactly zero; the prediction is degenerate
    assert run_cli(["predict", "--x", "0"]) == 1
    assert "DegenerateError" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "finitewidth", "predict", "--width", "8"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0
    assert json.loads(res.stdout)["sigma2_pred"] == pytest.approx(16 / 81, rel=1e-14)

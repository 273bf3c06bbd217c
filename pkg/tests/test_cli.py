import json
import math

import numpy as np
import pytest

from gkpforge import cli, kernels


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_timing(report):
    report = dict(report)
    report.pop("timing")
    return report


def test_run_preset_report(capsys):
    code, out, _ = run_cli(capsys, "run", "--preset", "table1-row5", "--m", "3")
    assert code == 0
    rep = json.loads(out)
    assert rep["outcome"]["probability"] == pytest.approx(0.3125, abs=5e-4)
    prov = rep["provenance"]
    assert prov["converged"] and prov["n_electrons"] == 3 and prov["engine"] == "analytic"
    assert rep["config"]["steps"][0]["post"] == "even"
    assert {f["reference"] for f in rep["outcome"]["fidelities"]} >= {"gkp-square-0", "gkp-square-1"}


def test_run_is_deterministic_apart_from_timing(capsys):
    argv = ("run", "--preset", "cat", "--N", "3", "--g", "1.1", "--k", "1", "--jitter", "0.1",
            "--samples", "5", "--seed", "4")
    _, a, _ = run_cli(capsys, *argv)
    _, b, _ = run_cli(capsys, *argv)
    assert strip_timing(json.loads(a)) == strip_timing(json.loads(b))


def test_cat_preset_uses_cat_references(capsys):
    _, out, _ = run_cli(capsys, "run", "--preset", "cat", "--g", "1.2533")
    rep = json.loads(out)["outcome"]
    assert rep["probability"] == pytest.approx(0.5216, abs=1e-4)
    best = max(rep["fidelities"], key=lambda f: f["fidelity"])
    assert best["reference"] == "cat-N2-k0"
    assert best["fidelity"] == pytest.approx(1.0, abs=1e-10)
    assert rep["squeezing_db"] == []


def test_run_config_file(tmp_path, capsys):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"steps": [{"g": [0, 0.6], "repeat": 2}, {"g": 0.9, "post": "odd"}]}))
    code, out, _ = run_cli(capsys, "run", "--config", str(cfg), "--no-metrics")
    assert code == 0
    rep = json.loads(out)
    assert len(rep["outcome"]["step_probabilities"]) == 3
    assert "fidelities" not in rep["outcome"]
    empty = tmp_path / "e.json"
    empty.write_text(json.dumps({"steps": []}))
    _, out, _ = run_cli(capsys, "run", "--config", str(empty))
    assert json.loads(out)["outcome"]["probability"] == 1.0


def test_error_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"preset": "cat", "flavour": "x"}))
    code, _, err = run_cli(capsys, "run", "--config", str(bad))
    assert code == 2
    assert json.loads(err)["error"] == "ConfigError"
    code, _, err = run_cli(capsys, "run", "--preset", "cat", "--g", "0", "--k", "1")
    assert code == 5
    code, _, _ = run_cli(capsys, "run", "--preset", "table1-row2", "--m", "3", "--cutoff", "15")
    assert code == 3
    code, _, _ = run_cli(capsys, "validate", "--only", "c99")
    assert code == 2


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run_cli(capsys, "sweep", "--preset", "table1-row2", "--param", "m", "--values", "1..3",
                         "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    header = lines[0].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[1:]]
    assert [r["value"] for r in rows] == ["1", "2", "3"]
    probs = [float(r["probability"]) for r in rows]
    assert probs[0] > probs[1] > probs[2]
    for r in rows:
        x_db = float(r["squeezing_db"].split(";")[0].split(":")[1])
        assert x_db == pytest.approx(10 * math.log10(1 + math.pi * int(r["value"])), abs=0.5)


def test_sweep_records_point_errors(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--preset", "cat", "--param", "g", "--values", "0,1.0", "--k", "1")
    assert code == 0
    lines = out.splitlines()
    assert "ZeroProbabilityError" in lines[1]
    assert lines[2].split(",")[2] == "ok"


def test_wigner_export(tmp_path, capsys):
    out = tmp_path / "w.csv"
    code, summary, _ = run_cli(capsys, "wigner", "--config", _vacuum_config(tmp_path), "--grid=-6:6:61",
                               "--out", str(out))
    assert code == 0
    text = out.read_text()
    assert text.startswith("# wigner rows=p cols=x x=-6.0:6.0:61")
    vals = np.loadtxt(out, delimiter=",", comments="#")
    assert vals.shape == (61, 61)
    assert vals.max() == pytest.approx(1 / math.pi, rel=1e-12)
    assert json.loads(summary)["integral"] == pytest.approx(1.0, abs=1e-6)


def _vacuum_config(tmp_path):
    path = tmp_path / "vac.json"
    path.write_text(json.dumps({"steps": []}))
    return str(path)


def test_wigner_warns_on_narrow_grid(tmp_path, capsys):
    code, _, err = run_cli(capsys, "wigner", "--config", _vacuum_config(tmp_path), "--grid=-1:1:11")
    assert code == 0
    assert "warnings" in json.loads(err)


def test_validate_single_check_and_preset_list(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "validate", "--only", "c04", "--out", str(tmp_path / "v.json"))
    assert code == 0
    assert out.startswith("PASS [c04]")
    assert json.loads((tmp_path / "v.json").read_text())["results"][0]["passed"]
    _, out, _ = run_cli(capsys, "preset-list")
    assert "table1-row8" in out.split() and "bell" in out.split()


def test_validate_detects_injected_fault(monkeypatch, capsys):
    real = kernels.displacement_matrix
    # a 1% gain error in the displacement kernel must be caught
    monkeypatch.setattr(kernels, "displacement_matrix", lambda a, d: 1.01 * real(a, d))
    code, out, _ = run_cli(capsys, "validate", "--only", "c04")
    assert code == 4
    assert out.startswith("FAIL [c04]")

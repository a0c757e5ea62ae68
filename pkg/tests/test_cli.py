import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from specband.cli import main


@pytest.fixture
def panel(tmp_path):
    cfg = {
        "centers": [0.9, 1.6],
        "half_bandwidth": 0.08,
        "amp_variance": 0.64,
        "snr_db": 15,
        "N": 80,
        "L": 60,
        "amp_law": "uniform",
        "seed": 7,
    }
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    out = tmp_path / "panel.csv"
    assert main(["signal", "gen", "--config", str(tmp_path / "cfg.json"), "--out", str(out)]) == 0
    return out


def test_signal_gen(panel):
    rows = list(csv.reader(panel.open()))
    assert rows[0] == [f"t{t}" for t in range(1, 81)]
    assert len(rows) == 61 and all(len(r) == 80 for r in rows[1:])
    truth = json.loads(panel.with_name("panel.truth.json").read_text())
    om = np.array(truth["omega"])
    assert om.shape == (60, 2) and np.all(np.abs(om - [0.9, 1.6]) <= 0.08)


def test_signal_gen_deterministic(panel, tmp_path):
    again = tmp_path / "again.csv"
    main(["signal", "gen", "--config", str(tmp_path / "cfg.json"), "--out", str(again)])
    assert again.read_bytes() == panel.read_bytes()


def test_covest(panel, tmp_path):
    out = tmp_path / "est.json"
    assert main(["covest", "--panel", str(panel), "--nu", "2", "--out", str(out)]) == 0
    est = json.loads(out.read_text())
    for key in ("first_column", "eigenvalues", "noise_floor", "rank_hat", "W_hat"):
        assert key in est
    assert len(est["first_column"]) == 80


def test_estimate(panel, tmp_path):
    out = tmp_path / "freq.json"
    assert main(["estimate", "--panel", str(panel), "--nu", "2", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    for key in ("theta_hat", "W_hat", "rank_hat", "phases", "weights", "cluster_labels"):
        assert key in res
    np.testing.assert_allclose(res["theta_hat"], [0.9, 1.6], atol=0.05)


def test_map(panel, tmp_path):
    out = tmp_path / "map.json"
    args = ["map", "--panel", str(panel), "--theta0", "0.9,1.6", "--w", "0.08", "--out", str(out)]
    assert main(args) == 0
    res = json.loads(out.read_text())
    assert set(res) >= {"omega_map", "iterations", "converged", "objective_trace"}
    assert np.all(np.abs(np.array(res["omega_map"]) - [0.9, 1.6]) <= 0.08)


def test_kernel_eig(tmp_path):
    out = tmp_path / "eig.csv"
    assert main(["kernel", "eig", "--n", "40", "--centers", "1.0", "--w", "0.2", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["index", "eigenvalue"] and len(rows) == 41
    vals = [float(r[1]) for r in rows[1:]]
    assert vals == sorted(vals, reverse=True)
    assert vals[0] == pytest.approx(np.pi / (2 * 0.2), rel=1e-2)


def test_kernel_eig_normalized(tmp_path):
    out = tmp_path / "eig.csv"
    main(["kernel", "eig", "--n", "200", "--centers", "1.0", "--w", "0.2", "--normalized", "--out", str(out)])
    vals = np.array([float(r[1]) for r in list(csv.reader(out.open()))[1:]])
    assert vals.sum() == pytest.approx(200 * 4 * 0.2 / (2 * np.pi))


def test_mc_run(tmp_path, capsys):
    cfg = {"trials": 2, "N": [50], "L": [40], "snr_db": [15], "nu": 2, "master_seed": 3}
    (tmp_path / "mc.json").write_text(json.dumps(cfg))
    assert main(["mc", "run", "--config", str(tmp_path / "mc.json"), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "trials.csv").exists() and (tmp_path / "out" / "summary.json").exists()
    assert "median center err" in capsys.readouterr().out


def test_bad_config_exit_code(tmp_path, capsys):
    (tmp_path / "bad.json").write_text(json.dumps({"centers": [0.1], "half_bandwidth": 0.5, "N": 10, "L": 2}))
    assert main(["signal", "gen", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path / "p.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "specband.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("signal", "covest", "estimate", "map", "kernel", "mc"):
        assert cmd in out.stdout

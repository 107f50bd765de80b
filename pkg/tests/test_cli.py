import csv
import json
import subprocess
import sys

import pytest

from sparls.channel import read_trace_csv
from sparls.cli import main

FAST = ["--m", "12", "--l", "2", "--samples", "120", "--trials", "2"]


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_grid(tmp_path, capsys):
    out = tmp_path / "res.csv"
    assert main(["run", *FAST, "--snr-db", "20", "30", "--fd", "0", "0.001", "--out", str(out)]) == 0
    data = rows(out)
    assert len(data) == 2 * 2 * 2
    assert {r["algorithm"] for r in data} == {"sparls", "rls"}
    assert "ccr=" in capsys.readouterr().out


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"M": 12, "L": 2, "n_samples": 100, "n_trials": 1, "snr_db": [25.0], "fd": 0.0, "gamma": 4.0}))
    out = tmp_path / "res.csv"
    assert main(["run", "--config", str(cfg), "--algorithms", "sparls", "--seed", "9", "--out", str(out)]) == 0
    data = rows(out)
    assert len(data) == 1 and data[0]["seed"] == "9"
    manifest = json.loads((tmp_path / "res.manifest.json").read_text())
    assert manifest["results"][0]["config"]["gamma"] == 4.0
    assert manifest["results"][0]["config"]["algorithms"] == ["sparls"]


def test_sweep_default_grid(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--m", "8", "--l", "1", "--samples", "40", "--trials", "1", "--algorithms", "rls", "--out", str(out)]) == 0
    assert len(rows(out)) == 5 * 6


def test_trace_export(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["trace", "--m", "6", "--l", "2", "--samples", "30", "--seed", "3", "--out", str(out)]) == 0
    t = read_trace_csv(out)
    assert t.w.shape == (30, 6) and t.support.size == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--trials", "0"],
        ["run", "--algorithms", "lms"],
        ["run", "--config", "/nonexistent/cfg.json"],
        ["run", *FAST, "--out", "/nonexistent/dir/x.csv"],
    ],
)
def test_errors_exit_nonzero(argv, capsys):
    assert main(argv) != 0
    assert "error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = tmp_path / "t.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "sparls.cli", "trace", "--m", "4", "--l", "1", "--samples", "5", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()

import io
import json
import subprocess
import sys

import pytest

from lsreinit import cli, experiments
from lsreinit.errors import NumericalBlowup
from lsreinit.grid import read_trajectory

SMALL = {
    "experiment": "evolve",
    "problem": {"name": "linear"},
    "grid": {"lo": -1, "hi": 1, "n": 41},
    "h1": {"velocity": "constant", "params": {"a": 1.0}},
    "T": 0.2,
    "integrator": "euler",
    "snap_every": 5,
}


def write_cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_run_and_report(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", str(write_cfg(tmp_path, SMALL)), "--out", str(out)]) == 0
    for name in ("manifest.csv", "report.json", "table.csv", "timings.json", "plot.py"):
        assert (out / name).is_file()
    subdirs = [p for p in out.iterdir() if p.is_dir()]
    assert subdirs
    tr = read_trajectory(subdirs[0])
    assert tr.final.time == pytest.approx(0.2)
    capsys.readouterr()
    assert cli.main(["report", str(out)]) == 0
    assert "experiment: evolve" in capsys.readouterr().out


def test_report_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = write_cfg(tmp_path, SMALL)
    assert cli.main(["run", str(cfg), "--out", str(a)]) == 0
    assert cli.main(["run", str(cfg), "--out", str(b)]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_schema_errors_exit_2(tmp_path, capsys):
    bad = dict(SMALL, cfl="fast")
    assert cli.main(["run", str(write_cfg(tmp_path, bad))]) == 2
    assert "cfl" in capsys.readouterr().err
    assert cli.main(["run", str(write_cfg(tmp_path, dict(SMALL, colour="red")))]) == 2
    missing = {k: v for k, v in SMALL.items() if k != "T"}
    assert cli.main(["run", str(write_cfg(tmp_path, missing))]) == 2


def test_io_errors_exit_4(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == 4
    assert cli.main(["report", str(tmp_path)]) == 4


def test_blowup_exit_3(tmp_path, monkeypatch, capsys):
    def boom(cfg, out=None):
        raise NumericalBlowup(0.125)

    monkeypatch.setattr(experiments, "run_experiment", boom)
    assert cli.main(["run", str(write_cfg(tmp_path, SMALL))]) == 3
    assert "0.125" in capsys.readouterr().err


def test_cell_command(capsys):
    assert cli.main(["cell", "--a", "1", "--b", "-0.5", "--theta", "3", "--samples", "5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "lambda,-0.125"
    assert lines[1] == "tau,v" and len(lines) == 7
    assert float(lines[2].split(",")[1]) == pytest.approx(float(lines[-1].split(",")[1]), abs=1e-12)
    assert cli.main(["cell", "--a", "1", "--b", "2", "--theta", "0"]) == 2


def test_oracle_command(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO("x,t\n0,0.5\n0,1.5\n"))
    assert cli.main(["oracle", "two-bumps"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0] == "x,t,w,d"
    assert rows[1] == "0.0,0.5,0.0,0.0"
    assert rows[2] == "0.0,1.5,0.5,4.5"
    monkeypatch.setattr(sys, "stdin", io.StringIO("1,2,3\n"))
    assert cli.main(["oracle", "bounded-speed"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "lsreinit", "oracle", "hopf-lax-two-bumps"],
                         input="2.5,0.5\n", capture_output=True, text=True, check=True)
    w = float(res.stdout.strip().splitlines()[1].split(",")[2])
    assert w == pytest.approx(1.0, abs=1e-6)

import subprocess
import sys

import pytest

from soppp import cli
from soppp.harness import BoundReport, read_csv


def write(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return str(p)


def test_graph_info_output(capsys):
    assert cli.main(["graph-info", "--game", "cb", "--k", "3", "--n", "3"]) == 0
    out = capsys.readouterr().out
    for line in ("N: 10", "E: 18", "P: 10", "path_length: 3", "alpha_bound: 12", "a0: true", "symmetric: false"):
        assert line in out.splitlines()


def test_graph_info_hs(capsys):
    assert cli.main(["graph-info", "--game", "hs", "--k", "3", "--n", "3", "--kappa", "1", "--condition", "c1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert {"N: 11", "E: 20", "P: 17", "path_length: 4", "alpha_bound: 3", "symmetric: true", "a0: false"} <= set(out)


def test_simulate_writes_csv(tmp_path, capsys):
    cfg = write(tmp_path, "game=cb k=2 n=2 T=5 seed=1 reps=2\n")
    out = tmp_path / "out.csv"
    assert cli.main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    assert read_csv(out)["t"].tolist() == [1, 2, 3, 4, 5]


def test_simulate_out_from_config(tmp_path):
    out = tmp_path / "from_cfg.csv"
    cfg = write(tmp_path, f"game=cb k=2 n=2 T=3 seed=1 reps=1 out={out}\n")
    assert cli.main(["simulate", "--config", cfg]) == 0
    assert out.exists()


def test_validation_errors_exit_1(tmp_path, capsys):
    assert cli.main(["simulate", "--config", write(tmp_path, "game=cb k=3 n=3\nT=abc seed=1")]) == 1
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert cli.main(["verify-bound", "--config", write(tmp_path, "game=cb k=3 n=3 T=5")]) == 1
    assert cli.main(["graph-info", "--game", "hs", "--k", "3", "--n", "3"]) == 1
    assert cli.main(["graph-info", "--game", "chess", "--k", "3", "--n", "3"]) == 1
    assert cli.main(["nonsense"]) == 1


def test_verify_bound_pass(tmp_path, capsys):
    cfg = write(tmp_path, "game=hs k=3 n=3 kappa=1 adversary=fixed losses=0.2,0.7,0.1 T=100 seed=1 reps=4")
    assert cli.main(["verify-bound", "--config", cfg]) == 0
    assert "check: PASS" in capsys.readouterr().out


def test_verify_bound_failure_exit_2(tmp_path, monkeypatch):
    failing = BoundReport(10.0, 0.1, 1.0, 0.1, 0.1, False)
    monkeypatch.setattr(cli, "verify_bound", lambda cfg: failing)
    assert cli.main(["verify-bound", "--config", write(tmp_path, "game=cb k=3 n=3 T=5 seed=1")]) == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "soppp", "graph-info", "--game", "hs", "--k", "4", "--n", "2", "--kappa", "0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "P: 4" in proc.stdout

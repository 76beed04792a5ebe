import numpy as np
import pandas as pd
import pytest

from app.cli import EXIT_CONFIG, EXIT_FIT, EXIT_IO, EXIT_OK, main

SMALL_CONFIG = """
L = 3
J_q_tau = 0.3
n_cycles = 20
record_stride = 2
n_trajectories = 3
run_name = small
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CONFIG, encoding="utf-8")
    return path


def test_run_command(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--out", str(out), "--seed", "3", "run", str(config_path)]) == EXIT_OK
    assert (out / "small_ensemble_n_q.csv").exists()
    assert "small_ensemble_n_q.csv" in capsys.readouterr().out


def test_thread_count_does_not_change_results(config_path, tmp_path):
    assert main(["run", str(config_path), "--out", str(tmp_path / "one"), "--threads", "1"]) == EXIT_OK
    assert main(["run", str(config_path), "--out", str(tmp_path / "four"), "--threads", "4"]) == EXIT_OK
    for name in ["small_traj0.csv", "small_traj2.csv", "small_ensemble_n_q.csv"]:
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "four" / name).read_bytes()


def test_out_directory_from_environment(config_path, tmp_path, monkeypatch):
    monkeypatch.setenv("TLS_RELAX_OUT", str(tmp_path / "env"))
    assert main(["run", str(config_path)]) == EXIT_OK
    assert (tmp_path / "env" / "small_traj0.csv").exists()


def test_fit_command(tmp_path, capsys):
    t = np.linspace(0, 1000, 200)
    path = tmp_path / "decay.csv"
    pd.DataFrame({"t": t, "mean": 0.875 * np.exp(-t / 200) + 0.125, "std": 0.0 * t}).to_csv(path, index=False)
    assert main(["fit", str(path), "--offset", "free", "--window", "0,800"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "T=" in out
    assert "converged=true" in out


def test_fit_failure_exit_code(tmp_path):
    path = tmp_path / "short.csv"
    pd.DataFrame({"t": [0.0, 1.0, 2.0], "n_q": [1.0, 0.5, 0.25]}).to_csv(path, index=False)
    assert main(["fit", str(path)]) == EXIT_FIT


def test_exit_codes(config_path, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("J_q_tua = 0.1\n", encoding="utf-8")
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "missing.cfg")]) == EXIT_IO
    assert main(["fit", str(tmp_path / "missing.csv")]) == EXIT_IO
    assert main(["scan", str(config_path), "--J", "0.01,0.02"]) == EXIT_CONFIG


def test_argument_errors():
    with pytest.raises(SystemExit) as excinfo:
        main(["reproduce", "fig9"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit):
        main(["fit", "x.csv", "--window", "1,2,3"])

import numpy as np
import pandas as pd
import pytest

from app.errors import OutputError
from app.features.fftie import Trajectory, summarize
from app.tools.utils import format_report, parse_report, read_series, write_ensemble


def _ensemble(with_coherence=False):
    times = np.array([0.0, 2.5, 5.0])
    trajectories = [
        Trajectory(
            seed=k,
            times=times,
            n_q=np.array([1.0, 0.8 - 0.1 * k, 0.6]),
            coherence=np.array([1.0, 0.9, 0.7 + 0.1 * k]) if with_coherence else None,
        )
        for k in range(2)
    ]
    return summarize(trajectories)


def test_write_ensemble_layout(tmp_path):
    paths = write_ensemble(_ensemble(with_coherence=True), tmp_path / "out", "demo")
    assert sorted(p.name for p in paths.values()) == [
        "demo_ensemble_coherence.csv",
        "demo_ensemble_n_q.csv",
        "demo_traj0.csv",
        "demo_traj1.csv",
    ]
    raw = (tmp_path / "out" / "demo_traj1.csv").read_bytes()
    assert raw.startswith(b"t,n_q,coherence\n")
    assert b"\r\n" not in raw
    assert (tmp_path / "out" / "demo_ensemble_n_q.csv").read_text().splitlines()[0] == "t,mean,std"


def test_read_series_picks_the_column(tmp_path):
    paths = write_ensemble(_ensemble(with_coherence=True), tmp_path, "demo")
    t, coherence = read_series(paths["trajectory_1"], "coherence")
    np.testing.assert_allclose(t, [0.0, 2.5, 5.0])
    np.testing.assert_allclose(coherence, [1.0, 0.9, 0.8])

    t, mean = read_series(paths["ensemble_n_q"], "n_q")
    np.testing.assert_allclose(mean, [1.0, 0.75, 0.6])


def test_read_series_errors(tmp_path):
    with pytest.raises(OutputError):
        read_series(tmp_path / "missing.csv")

    bad = tmp_path / "bad.csv"
    pd.DataFrame({"time": [0.0], "n_q": [1.0]}).to_csv(bad, index=False)
    with pytest.raises(OutputError):
        read_series(bad)

    with pytest.raises(OutputError):
        read_series(write_ensemble(_ensemble(with_coherence=True), tmp_path, "both")["ensemble_n_q"], "coherence")

    paths = write_ensemble(_ensemble(), tmp_path, "plain")
    with pytest.raises(OutputError):
        read_series(paths["trajectory_0"], "coherence")

    text = tmp_path / "text.csv"
    text.write_text("t,n_q\n0,abc\n")
    with pytest.raises(OutputError):
        read_series(text)


def test_report_is_table_and_key_values():
    text = format_report({"T": 6131.4, "converged": True, "window": "full"}, title="fit")
    assert text.startswith("fit\n")
    assert "| T " in text
    assert parse_report(text) == {"T": "6131.4", "converged": "true", "window": "full"}

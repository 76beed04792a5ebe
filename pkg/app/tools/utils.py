import logging
import re
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np
import pandas as pd
from tabulate import tabulate

from app.errors import OutputError
from app.features.fftie import Ensemble, Trajectory

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
ENSEMBLE_FILE = re.compile(r"_ensemble_(\w+)\.csv$")


def write_frame(df: pd.DataFrame, path: Path) -> Path:
    """Write a CSV with 12 significant digits and LF line endings."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %s (%d rows)", path, len(df))
    return path


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    columns = {"t": traj.times, "n_q": traj.n_q}
    if traj.coherence is not None:
        columns["coherence"] = traj.coherence
    return pd.DataFrame(columns)


def ensemble_frame(ensemble: Ensemble, observable: str) -> pd.DataFrame:
    return pd.DataFrame(
        {"t": ensemble.times, "mean": ensemble.mean[observable], "std": ensemble.std[observable]}
    )


def write_ensemble(ensemble: Ensemble, out_dir: Path, prefix: str) -> dict[str, Path]:
    """One CSV per trajectory and one ``t,mean,std`` CSV per observable."""
    out_dir = Path(out_dir)
    paths = {}
    width = len(str(len(ensemble.trajectories) - 1))
    for k, traj in enumerate(ensemble.trajectories):
        paths[f"trajectory_{k}"] = write_frame(trajectory_frame(traj), out_dir / f"{prefix}_traj{k:0{width}d}.csv")
    for observable in ensemble.observables:
        paths[f"ensemble_{observable}"] = write_frame(
            ensemble_frame(ensemble, observable), out_dir / f"{prefix}_ensemble_{observable}.csv"
        )
    return paths


def read_series(path: Path, observable: str = "n_q") -> tuple[np.ndarray, np.ndarray]:
    """Times and values from an emitted CSV.

    Per-trajectory files hold one column per observable; ensemble files hold
    ``mean`` and ``std`` for a single observable.
    """
    path = Path(path)
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc

    if "t" not in df.columns:
        raise OutputError(f"{path}: missing 't' column, found {list(df.columns)}")
    if observable in df.columns:
        column = observable
    elif "mean" in df.columns:
        column = "mean"
        named = ENSEMBLE_FILE.search(path.name)
        if named and named.group(1) != observable:
            raise OutputError(f"{path}: ensemble file of {named.group(1)!r}, not {observable!r}")
    else:
        raise OutputError(f"{path}: neither {observable!r} nor 'mean' column present")

    frame = df[["t", column]].apply(pd.to_numeric, errors="coerce")
    if frame.isna().any().any():
        raise OutputError(f"{path}: non-numeric entries in columns 't'/{column!r}")
    return frame["t"].to_numpy(), frame[column].to_numpy()


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def format_report(values: Mapping[str, Any], title: Optional[str] = None) -> str:
    """
    Render a report twice: a human-readable table, then ``key=value`` lines.

    Args:
        values (Mapping[str, Any]): ordered report entries
        title (str, optional): heading printed above the table

    Returns:
        str: the combined report
    """
    rows = [(key, format_value(value)) for key, value in values.items()]
    parts = []
    if title:
        parts.append(title)
    parts.append(tabulate(rows, headers=["quantity", "value"], tablefmt="psql"))
    parts.append("")
    parts.extend(f"{key}={value}" for key, value in rows)
    return "\n".join(parts) + "\n"


def parse_report(text: str) -> dict[str, str]:
    """The ``key=value`` lines of a report."""
    values = {}
    for line in text.splitlines():
        if "=" in line and not line.startswith(("|", "+")):
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def write_text(text: str, path: Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %s", path)
    return path

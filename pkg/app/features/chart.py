from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import plotly.graph_objs as go

from app.features.fftie import Ensemble, Trajectory
from app.features.fitting import FitResult, ScalingResult

OBSERVABLE_LABELS = {
    "n_q": "<n_q>",
    "coherence": "sqrt(<sx>^2 + <sy>^2)",
}


def create_relaxation_chart(
    ensemble: Ensemble,
    observable: str,
    title: str,
    fit: Optional[FitResult] = None,
) -> go.Figure:
    """
    Generate a Plotly chart of one observable over an ensemble.

    Args:
    - ensemble (Ensemble): trajectories with mean/std already reduced
    - observable (str): "n_q" or "coherence"
    - title (str): chart title
    - fit (FitResult, optional): exponential fit drawn on top of the mean

    Returns:
    - go.Figure: Plotly figure with individual trajectories, mean and a one-sigma band
    """
    t = ensemble.times
    mean, std = ensemble.mean[observable], ensemble.std[observable]
    fig = go.Figure()

    for traj in ensemble.trajectories:
        fig.add_trace(
            go.Scatter(
                x=t, y=getattr(traj, observable), mode="lines", showlegend=False,
                line=dict(width=0.5, color="rgba(31, 119, 180, 0.25)"),
            )
        )

    # one-sigma band
    fig.add_trace(
        go.Scatter(
            x=np.concatenate([t, t[::-1]]),
            y=np.concatenate([mean + std, (mean - std)[::-1]]),
            fill="toself", fillcolor="rgba(31, 119, 180, 0.2)",
            line=dict(width=0), name="mean +/- std",
        )
    )
    fig.add_trace(go.Scatter(x=t, y=mean, mode="lines", name="mean", line=dict(color="blue")))

    if fit is not None and fit.converged:
        fig.add_trace(
            go.Scatter(
                x=t, y=fit.evaluate(t), mode="lines", name=f"fit T={fit.time_constant:.1f}",
                line=dict(color="red", dash="dash"),
            )
        )

    fig.update_layout(
        height=500, width=800, title_text=title, plot_bgcolor="white",
        legend=dict(orientation="h", yanchor="bottom", y=1.02, xanchor="right", x=1),
        font=dict(size=10),
    )
    fig.update_xaxes(title_text="t")
    fig.update_yaxes(title_text=OBSERVABLE_LABELS.get(observable, observable))
    return fig


def create_curves_chart(curves: Sequence[tuple[str, Trajectory]], title: str) -> go.Figure:
    """Overlay of single-trajectory n_q curves, one per label."""
    fig = go.Figure()
    for label, traj in curves:
        fig.add_trace(go.Scatter(x=traj.times, y=traj.n_q, mode="lines", name=label))
    fig.update_layout(height=500, width=800, title_text=title, plot_bgcolor="white", font=dict(size=10))
    fig.update_xaxes(title_text="t")
    fig.update_yaxes(title_text=OBSERVABLE_LABELS["n_q"])
    return fig


def create_scaling_chart(
    scalings: dict[str, ScalingResult],
    sigmas: dict[str, Sequence[float]],
    title: str,
) -> go.Figure:
    """Log-log plot of fitted decay times against J_q_tau with power-law lines."""
    fig = go.Figure()
    for name, result in scalings.items():
        J = np.asarray(result.J_values)
        fig.add_trace(
            go.Scatter(
                x=J, y=result.T_values, mode="markers", name=name,
                error_y=dict(type="data", array=list(sigmas.get(name, [0.0] * len(J)))),
                marker=dict(symbol="square-open", size=9),
            )
        )
        grid = np.geomspace(J.min(), J.max(), 50)
        fig.add_trace(
            go.Scatter(
                x=grid, y=[result.predict(j) for j in grid], mode="lines",
                name=f"{name} ~ J^{result.exponent:.4f}", line=dict(dash="dash"),
            )
        )
    fig.update_layout(height=500, width=700, title_text=title, plot_bgcolor="white", font=dict(size=10))
    fig.update_xaxes(type="log", title_text="J_q_tau")
    fig.update_yaxes(type="log", title_text="T")
    return fig


def save_static(fig: go.Figure, path: Path) -> Path:
    """Render a figure to a static file; the format follows the suffix (svg by default)."""
    path = Path(path)
    if not path.suffix:
        path = path.with_suffix(".svg")
    fig.write_image(str(path))
    return path

"""Reproduction of the published figures.

Each figure handler runs its parameter set from ``app.chains.templates``,
writes CSVs under ``<out>/<figure_id>/`` and returns the acceptance
quantities that end up in ``summary.txt``.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from app.chains import templates
from app.errors import ConfigError
from app.features.analysis import (
    count_local_maxima,
    first_revival_period,
    natural_time_to_microseconds,
    ratio_with_uncertainty,
    revivals_above,
    tail_mean,
    uncertainty_to_microseconds,
)
from app.features.chart import create_curves_chart, save_static
from app.features.fftie import Ensemble, PreparedModel, Trajectory, run_coherent
from app.features.fitting import FitResult, fit_envelope, fit_exponential, fit_power_law
from app.features.propagation import StateVector, eigenstate_overlaps, participation_ratio
from app.tools.commands import ScanReport, cmd_run, cmd_scan
from app.tools.types import TARGET_ROWS, RunConfig
from app.tools.utils import format_report, trajectory_frame, write_frame, write_text

logger = logging.getLogger(__name__)


@dataclass
class ReproduceContext:
    figure_id: str
    out_dir: Path
    master_seed: int
    workers: Optional[int] = None
    plot: bool = False
    paths: dict[str, Path] = field(default_factory=dict)

    def config(self, run_name: str, **overrides) -> RunConfig:
        return RunConfig(
            master_seed=self.master_seed,
            output_dir=str(self.out_dir),
            run_name=run_name,
            plot=self.plot,
            **overrides,
        )

    def ensemble(self, config: RunConfig) -> Ensemble:
        result = cmd_run(config, self.out_dir, self.workers)
        self.paths.update({f"{config.run_name}_{key}": path for key, path in result.paths.items()})
        return result.ensemble

    def scan(self, config: RunConfig) -> ScanReport:
        report = cmd_scan(config, templates.SCAN_J, self.out_dir, self.workers)
        self.paths.update({f"{config.run_name}_{key}": path for key, path in report.paths.items()})
        return report

    def curves(self, curves: list[tuple[str, Trajectory]], title: str) -> None:
        if self.plot:
            fig = create_curves_chart(curves, title)
            self.paths["curves_plot"] = save_static(fig, self.out_dir / f"{self.figure_id}_curves.svg")


@dataclass
class ReproduceResult:
    figure_id: str
    summary: dict
    text: str
    paths: dict[str, Path]


def _add_fit(summary: dict, name: str, result: FitResult) -> None:
    summary[name] = result.time_constant
    summary[f"sigma_{name}"] = result.sigma_time_constant
    summary[f"{name}_us"] = natural_time_to_microseconds(result.time_constant)
    summary[f"sigma_{name}_us"] = uncertainty_to_microseconds(result.sigma_time_constant)
    summary[f"{name}_converged"] = result.converged


def _mean_curve(ensemble: Ensemble) -> Trajectory:
    return Trajectory(seed=-1, times=ensemble.times, n_q=ensemble.mean["n_q"])


def _reference_scaling(values: list[float]):
    return fit_power_law(templates.SCAN_J, values)


def _fig2(ctx: ReproduceContext) -> dict:
    summary: dict = {"t_max": templates.COHERENT_T_MAX}
    curves = []
    for label, overrides in templates.FIG2_CURVES:
        config = ctx.config(f"fig2_{label}", **overrides)
        params, init = config.to_model_params(), config.to_initial_state()
        traj = run_coherent(params, init, templates.COHERENT_T_MAX, templates.COHERENT_SAMPLES)
        ctx.paths[label] = write_frame(trajectory_frame(traj), ctx.out_dir / f"fig2_{label}.csv")
        curves.append((label, traj))

        model = PreparedModel(params, init)
        weights = eigenstate_overlaps(model.spectrum, StateVector(model.psi0))
        summary[f"{label}_min_n_q"] = float(np.min(traj.n_q))
        summary[f"{label}_final_n_q"] = float(traj.n_q[-1])
        summary[f"{label}_revival_period"] = first_revival_period(traj.times, traj.n_q)
        summary[f"{label}_participation_ratio"] = participation_ratio(weights)
    ctx.curves(curves, "Coherent exchange under H")
    return summary


def _fig3a(ctx: ReproduceContext) -> dict:
    ensemble = ctx.ensemble(ctx.config("fig3a", **templates.FIG3A))
    summary = {"equilibrium_n_q": tail_mean(ensemble.mean["n_q"]), "expected_equilibrium": templates.EQUILIBRIUM_N_Q}
    _add_fit(summary, "T1", fit_exponential(ensemble.times, ensemble.mean["n_q"]))
    return summary


def _fig3b(ctx: ReproduceContext) -> dict:
    ensemble = ctx.ensemble(ctx.config("fig3b", **templates.FIG3B))
    summary = {"equilibrium_coherence": tail_mean(ensemble.mean["coherence"])}
    _add_fit(summary, "T2", fit_exponential(ensemble.times, ensemble.mean["coherence"]))
    _add_fit(summary, "T1", fit_exponential(ensemble.times, ensemble.mean["n_q"]))
    return summary


def _fig3c(ctx: ReproduceContext) -> dict:
    ensemble = ctx.ensemble(ctx.config("fig3c", **templates.FIG3C))
    t, n_q = ensemble.times, ensemble.mean["n_q"]
    summary = {
        "J_q_tau": templates.FIG3C["J_q_tau"],
        "n_local_maxima": count_local_maxima(n_q, templates.FIG3C_PROMINENCE),
        "equilibrium_n_q": tail_mean(n_q),
    }
    _add_fit(summary, "T1", fit_exponential(t, n_q))
    _add_fit(summary, "T1_envelope", fit_envelope(t, n_q, prominence=templates.FIG3C_PROMINENCE))
    summary["T1_extrapolated_reference"] = _reference_scaling(templates.REFERENCE_T1).predict(templates.EXTRAPOLATION_J)
    return summary


def _add_scaling(summary: dict, report: ScanReport, name: str, observable: str) -> None:
    scaling = report.scalings[name]
    summary[f"alpha_{name}"] = scaling.exponent
    summary[f"sigma_alpha_{name}"] = scaling.sigma_exponent
    summary[f"prefactor_{name}"] = scaling.prefactor
    for J in templates.SCAN_J:
        fit = report.fits[(observable, J)]
        summary[f"{name}_J{J:g}"] = fit.time_constant
        summary[f"sigma_{name}_J{J:g}"] = fit.sigma_time_constant


def _fig3d(ctx: ReproduceContext) -> dict:
    report = ctx.scan(ctx.config("fig3d", **templates.FIG3_SCAN_T1))
    summary: dict = {}
    _add_scaling(summary, report, "T1", "n_q")
    return summary


def _fig3e(ctx: ReproduceContext) -> dict:
    report = ctx.scan(ctx.config("fig3e", **templates.FIG3_SCAN_T2))
    summary: dict = {}
    _add_scaling(summary, report, "T2", "coherence")
    return summary


def _fig3f(ctx: ReproduceContext) -> dict:
    relaxation = ctx.scan(ctx.config("fig3f_relaxation", **templates.FIG3_SCAN_T1))
    dephasing = ctx.scan(ctx.config("fig3f_dephasing", **templates.FIG3_SCAN_T2))
    summary: dict = {}
    _add_scaling(summary, relaxation, "T1", "n_q")
    _add_scaling(summary, dephasing, "T2", "coherence")

    J = templates.SCAN_J[0]
    t1, t2 = relaxation.fits[("n_q", J)], dephasing.fits[("coherence", J)]
    ratio, sigma = ratio_with_uncertainty(t2.time_constant, t2.sigma_time_constant, t1.time_constant, t1.sigma_time_constant)
    summary[f"T2_over_T1_J{J:g}"] = ratio
    summary[f"sigma_T2_over_T1_J{J:g}"] = sigma
    summary["T1_extrapolated"] = relaxation.scalings["T1"].predict(templates.EXTRAPOLATION_J)
    summary["alpha_T1_reference"] = _reference_scaling(templates.REFERENCE_T1).exponent
    summary["alpha_T2_reference"] = _reference_scaling(templates.REFERENCE_T2).exponent
    return summary


def _fig4a(ctx: ReproduceContext) -> dict:
    summary: dict = {}
    curves = []
    for hopping in templates.FIG4A_HOPPINGS:
        label = f"J{hopping:g}"
        ensemble = ctx.ensemble(ctx.config(f"fig4a_{label}", J_tau=hopping, J_upsilon=hopping, **templates.FIG4A))
        _add_fit(summary, f"T1_{label}", fit_exponential(ensemble.times, ensemble.mean["n_q"]))
        curves.append((f"J_tau = J_upsilon = {hopping:g}", _mean_curve(ensemble)))
    ctx.curves(curves, "Relaxation against internal TLS coupling")
    return summary


def _fig4b(ctx: ReproduceContext) -> dict:
    level = templates.EQUILIBRIUM_N_Q + templates.FIG4B_REVIVAL_MARGIN
    summary: dict = {"revival_level": level}
    curves = []
    for t_H in templates.FIG4B_T_H:
        label = "tH_inf" if t_H is None else f"tH{t_H:g}"
        if t_H is None:
            config = ctx.config(f"fig4b_{label}", **templates.FIG4B)
            curve = run_coherent(
                config.to_model_params(), config.to_initial_state(), config.resolved_horizon(), TARGET_ROWS + 1
            )
            ctx.paths[label] = write_frame(trajectory_frame(curve), ctx.out_dir / f"fig4b_{label}.csv")
            summary[f"{label}_revival_period"] = first_revival_period(curve.times, curve.n_q, templates.FIG4B_PROMINENCE)
        else:
            ensemble = ctx.ensemble(ctx.config(f"fig4b_{label}", t_H=t_H, **templates.FIG4B))
            curve = _mean_curve(ensemble)
            _add_fit(summary, f"T1_{label}", fit_exponential(curve.times, curve.n_q))

        early = curve.times <= templates.FIG4B_EARLY_TIME
        summary[f"{label}_revivals"] = revivals_above(
            curve.times, curve.n_q, templates.EQUILIBRIUM_N_Q, templates.FIG4B_REVIVAL_MARGIN, templates.FIG4B_SMOOTHING
        )
        summary[f"{label}_early_min_n_q"] = float(np.min(curve.n_q[early]))
        curves.append((label, curve))
    ctx.curves(curves, "Relaxation against erasure interval")
    return summary


def _fig4c(ctx: ReproduceContext) -> dict:
    single = ctx.scan(ctx.config("fig4c_single", **templates.FIG4C))
    double = ctx.scan(ctx.config("fig4c_double", **templates.FIG4C_DOUBLE))
    summary: dict = {}
    _add_scaling(summary, single, "T1", "n_q")
    summary["alpha_T1_double"] = double.scalings["T1"].exponent
    ratios = []
    for J in templates.SCAN_J:
        one, two = single.fits[("n_q", J)], double.fits[("n_q", J)]
        summary[f"T1_double_J{J:g}"] = two.time_constant
        ratio, sigma = ratio_with_uncertainty(
            one.time_constant, one.sigma_time_constant, two.time_constant, two.sigma_time_constant
        )
        summary[f"ratio_single_double_J{J:g}"] = ratio
        summary[f"sigma_ratio_single_double_J{J:g}"] = sigma
        ratios.append(ratio)
    summary["ratio_single_double_mean"] = float(np.mean(ratios))
    return summary


FIGURES: dict[str, Callable[[ReproduceContext], dict]] = {
    "fig2": _fig2,
    "fig3a": _fig3a,
    "fig3b": _fig3b,
    "fig3c": _fig3c,
    "fig3d": _fig3d,
    "fig3e": _fig3e,
    "fig3f": _fig3f,
    "fig4a": _fig4a,
    "fig4b": _fig4b,
    "fig4c": _fig4c,
}


def cmd_reproduce(
    figure_id: str,
    master_seed: Optional[int] = None,
    out_dir: Optional[Path] = None,
    workers: Optional[int] = None,
    plot: bool = False,
) -> ReproduceResult:
    """Run the parameter set of ``figure_id`` and write its CSVs and ``summary.txt``.

    Outputs depend only on ``figure_id`` and ``master_seed``.
    """
    if figure_id not in FIGURES:
        raise ConfigError(f"unknown figure {figure_id!r}, expected one of {', '.join(templates.FIGURE_IDS)}")
    if master_seed is None:
        master_seed = RunConfig.model_fields["master_seed"].default
    out_dir = Path(out_dir or RunConfig.model_fields["output_dir"].default) / figure_id

    ctx = ReproduceContext(figure_id, out_dir, master_seed, workers, plot)
    logger.info("reproducing %s with master seed %d into %s", figure_id, master_seed, out_dir)
    summary = {"figure": figure_id, "master_seed": master_seed}
    summary.update(FIGURES[figure_id](ctx))

    text = format_report(summary, title=f"Reproduction of {figure_id}")
    ctx.paths["summary"] = write_text(text, out_dir / "summary.txt")
    return ReproduceResult(figure_id, summary, text, ctx.paths)

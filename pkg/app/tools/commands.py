"""The ``run``, ``fit`` and ``scan`` commands."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import pandas as pd
from tabulate import tabulate

from app.errors import FitError
from app.features.analysis import natural_time_to_microseconds, uncertainty_to_microseconds
from app.features.chart import create_relaxation_chart, create_scaling_chart, save_static
from app.features.fftie import Ensemble, QubitState, run_ensemble
from app.features.fitting import FitResult, OffsetMode, ScalingResult, fit_exponential, fit_power_law
from app.tools.types import FitInput, RunConfig, ScanInput
from app.tools.utils import ensemble_frame, format_report, read_series, write_ensemble, write_frame, write_text

logger = logging.getLogger(__name__)

DECAY_NAMES = {"n_q": "T1", "coherence": "T2"}

EnsembleRunner = Callable[..., Ensemble]


@dataclass
class RunResult:
    config: RunConfig
    ensemble: Ensemble
    paths: dict[str, Path]


@dataclass
class FitReport:
    result: FitResult
    text: str


@dataclass
class ScanReport:
    table: pd.DataFrame
    scalings: dict[str, ScalingResult] = field(default_factory=dict)
    fits: dict[tuple[str, float], FitResult] = field(default_factory=dict)
    text: str = ""
    paths: dict[str, Path] = field(default_factory=dict)


def _window(values: Optional[list]) -> Optional[tuple[float, float]]:
    return tuple(values) if values else None


def cmd_run(config: RunConfig, out_dir: Optional[Path] = None, workers: Optional[int] = None) -> RunResult:
    out_dir = Path(out_dir or config.output_path())
    schedule = config.to_schedule()
    logger.info(
        "run %s: %d cycles (horizon %.6g), stride %d, %d trajectories, seed %d",
        config.run_name, schedule.n_cycles, schedule.n_cycles * schedule.cycle_time,
        schedule.record_stride, config.n_trajectories, config.master_seed,
    )
    ensemble = run_ensemble(
        config.to_model_params(),
        config.to_initial_state(),
        schedule,
        config.n_trajectories,
        config.master_seed,
        workers=workers,
    )
    paths = write_ensemble(ensemble, out_dir, config.run_name)

    if config.plot:
        for observable in ensemble.observables:
            fit = _overlay_fit(ensemble, observable, config)
            fig = create_relaxation_chart(ensemble, observable, f"{config.run_name}: {observable}", fit=fit)
            paths[f"plot_{observable}"] = save_static(fig, out_dir / f"{config.run_name}_{observable}.svg")
    return RunResult(config, ensemble, paths)


def _overlay_fit(ensemble: Ensemble, observable: str, config: RunConfig) -> Optional[FitResult]:
    try:
        return fit_exponential(ensemble.times, ensemble.mean[observable], window=_window(config.fit_window))
    except FitError as exc:
        logger.warning("%s: no fit overlay for %s: %s", config.run_name, observable, exc)
        return None


def fit_report_values(result: FitResult, unit_MHz: float = 1.0, **context) -> dict:
    values = dict(context)
    values.update(result.as_dict())
    values["T_us"] = natural_time_to_microseconds(result.time_constant, unit_MHz)
    values["sigma_T_us"] = uncertainty_to_microseconds(result.sigma_time_constant, unit_MHz)
    values["unit_MHz"] = unit_MHz
    if not result.converged:
        values["message"] = result.message
    return values


def cmd_fit(request: FitInput) -> FitReport:
    """Fit ``A exp(-t/T) + C`` to one column of an emitted CSV."""
    times, values = read_series(request.csv_path, request.observable)
    try:
        offset_mode = OffsetMode.parse(request.offset_mode)
    except ValueError as exc:
        raise FitError(str(exc)) from exc
    result = fit_exponential(times, values, offset_mode, _window(request.window))
    text = format_report(
        fit_report_values(
            result,
            request.unit_MHz,
            file=str(request.csv_path),
            observable=request.observable,
            offset_mode=str(offset_mode),
            window=request.window or "full",
        ),
        title=f"Exponential fit of {request.csv_path}",
    )
    return FitReport(result, text)


def cmd_scan(
    config: RunConfig,
    J_list: list[float],
    out_dir: Optional[Path] = None,
    workers: Optional[int] = None,
    ensemble_runner: EnsembleRunner = run_ensemble,
) -> ScanReport:
    """Run and fit one ensemble per coupling, then fit the J scaling of the decay times.

    ``ensemble_runner`` has the signature of :func:`run_ensemble`.
    """
    J_list = ScanInput(J_list=J_list).J_list
    out_dir = Path(out_dir or config.output_path())
    observables = ["n_q"]
    if config.qubit_state is QubitState.PLUS:
        observables.append("coherence")

    rows = []
    fits: dict[tuple[str, float], FitResult] = {}
    for J in J_list:
        sub = config.model_copy(update={"J_q_tau": J, "run_name": f"{config.run_name}_J{J:g}"})
        schedule = sub.to_schedule()
        logger.info("scan point J_q_tau=%g: %d cycles", J, schedule.n_cycles)
        ensemble = ensemble_runner(
            sub.to_model_params(), sub.to_initial_state(), schedule,
            sub.n_trajectories, sub.master_seed, workers=workers,
        )
        for observable in observables:
            write_frame(ensemble_frame(ensemble, observable), out_dir / f"{sub.run_name}_ensemble_{observable}.csv")
            result = fit_exponential(ensemble.times, ensemble.mean[observable], window=_window(config.fit_window))
            if not result.converged:
                raise FitError(f"{DECAY_NAMES[observable]} fit at J_q_tau={J:g} did not converge: {result.message}")
            fits[(observable, J)] = result
            rows.append(
                {
                    "observable": observable,
                    "J": J,
                    "T": result.time_constant,
                    "sigma_T": result.sigma_time_constant,
                }
            )

    table = pd.DataFrame(rows)
    report = ScanReport(table=table, fits=fits)
    summary: dict = {"run_name": config.run_name, "n_trajectories": config.n_trajectories}
    for observable in observables:
        name = DECAY_NAMES[observable]
        part = table[table["observable"] == observable]
        report.paths[name] = write_frame(part[["J", "T", "sigma_T"]], out_dir / f"{config.run_name}_scan_{name}.csv")
        scaling = fit_power_law(part["J"], part["T"])
        report.scalings[name] = scaling
        summary[f"alpha_{name}"] = scaling.exponent
        summary[f"sigma_alpha_{name}"] = scaling.sigma_exponent
        summary[f"prefactor_{name}"] = scaling.prefactor
        summary[f"residual_{name}"] = scaling.residual_norm

    per_point = tabulate(
        [
            (r.observable, r.J, r.T, r.sigma_T, natural_time_to_microseconds(r.T))
            for r in table.itertuples()
        ],
        headers=["observable", "J_q_tau", "T", "sigma_T", "T_us"],
        tablefmt="psql",
        floatfmt=".6g",
    )
    report.text = per_point + "\n" + format_report(summary, title="Scaling fit")
    report.paths["report"] = write_text(report.text, out_dir / f"{config.run_name}_scan_report.txt")

    if config.plot:
        sigmas = {
            DECAY_NAMES[o]: table[table["observable"] == o]["sigma_T"].tolist() for o in observables
        }
        fig = create_scaling_chart(report.scalings, sigmas, f"{config.run_name}: decay time scaling")
        report.paths["plot"] = save_static(fig, out_dir / f"{config.run_name}_scaling.svg")
    return report

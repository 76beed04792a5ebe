import math
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.features.fftie import FftieSchedule, InitialState, QubitState, TimeAxis
from app.features.model import ModelParams

# Reference decay time at the reference coupling for the two-excitation bath;
# the simulation horizon scales it by J^-2.
REFERENCE_T1 = 6131.4
REFERENCE_J = 0.01
HORIZON_T1_MULTIPLE = 5.0
TARGET_ROWS = 5000


class RunConfig(BaseModel):
    """Every knob of one ensemble run. Defaults reproduce the J_q_tau = 0.01 relaxation run."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    # model
    L: int = Field(7, ge=1, description="Number of TLS sites in the chain")
    J_tau: float = Field(1.0, description="Tau hopping")
    J_upsilon: float = Field(1.0, description="Upsilon hopping")
    U_tau_site: Optional[List[float]] = Field(None, description="On-site tau energies; zeros when omitted")
    U_upsilon_site: Optional[List[float]] = Field(None, description="On-site upsilon energies; zeros when omitted")
    U_cross: float = Field(-0.2, description="Same-site tau-upsilon coupling")
    U_q: float = Field(0.0, description="Qubit energy")
    J_q_tau: float = Field(0.01, description="Qubit to tau-site-0 coupling")

    # initial state
    qubit_state: QubitState = Field(QubitState.ONE, description="zero, one or plus")
    tau_bits: int = Field(0, ge=0, description="Initial tau excitations, bit i = site i")
    upsilon_bits: int = Field(0b11, ge=0, description="Initial upsilon excitations, bit i = site i")

    # schedule
    t_H: float = Field(2.0, ge=0, description="Coherent segment duration")
    t_random: float = Field(0.5, ge=0, description="Erasure segment duration")
    disorder_range: List[float] = Field([0.0, 3.0], description="[lo, hi] of the uniform upsilon site energies")
    n_cycles: Optional[int] = Field(None, ge=1, description="FFTIE cycles; derived from the horizon when omitted")
    record_stride: Optional[int] = Field(None, ge=1, description="Record every k cycles; derived when omitted")
    time_axis: TimeAxis = Field(TimeAxis.INCLUDE_ERASURE, description="include_erasure or exclude_erasure")
    coherent_only: bool = Field(False, description="Evolve under H only")
    horizon: Optional[float] = Field(None, gt=0, description="Total time; default is 5 x the estimated T1")

    # ensemble and output
    n_trajectories: int = Field(10, ge=1, description="Trajectories per ensemble")
    master_seed: int = Field(20250607, description="Seed from which trajectory seeds are derived")
    output_dir: str = Field("results", description="Directory for CSV files and reports")
    run_name: str = Field("run", description="Prefix of every emitted file")
    fit_window: Optional[List[float]] = Field(None, description="[lo, hi] time window for fits")
    plot: bool = Field(False, description="Also emit static SVG plots")

    @field_validator("disorder_range", "fit_window")
    @classmethod
    def _pair(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is None:
            return value
        if len(value) != 2:
            raise ValueError(f"expected [lo, hi], got {value}")
        if value[0] > value[1]:
            raise ValueError(f"lower bound {value[0]} exceeds upper bound {value[1]}")
        return value

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        for name in ("U_tau_site", "U_upsilon_site"):
            values = getattr(self, name)
            if values is not None and len(values) != self.L:
                raise ValueError(f"{name} has {len(values)} entries, L is {self.L}")
        for name in ("tau_bits", "upsilon_bits"):
            if getattr(self, name) >> self.L:
                raise ValueError(f"{name}={getattr(self, name)} sets bits beyond L={self.L}")
        if self.n_cycles is not None and self.record_stride is not None and self.record_stride > self.n_cycles:
            raise ValueError(f"record_stride {self.record_stride} exceeds n_cycles {self.n_cycles}")
        if self.cycle_time <= 0:
            raise ValueError("t_H (and t_random on the include_erasure axis) must advance the clock")
        return self

    @property
    def cycle_time(self) -> float:
        if self.coherent_only or self.time_axis is TimeAxis.EXCLUDE_ERASURE:
            return self.t_H
        return self.t_H + self.t_random

    def to_model_params(self) -> ModelParams:
        return ModelParams(
            J_tau=self.J_tau,
            J_upsilon=self.J_upsilon,
            U_tau_site=self.U_tau_site or [0.0] * self.L,
            U_upsilon_site=self.U_upsilon_site or [0.0] * self.L,
            U_cross=self.U_cross,
            U_q=self.U_q,
            J_q_tau=self.J_q_tau,
        )

    def to_initial_state(self) -> InitialState:
        return InitialState(qubit_state=self.qubit_state, tau_bits=self.tau_bits, upsilon_bits=self.upsilon_bits)

    def estimated_t1(self) -> float:
        if self.J_q_tau == 0:
            return REFERENCE_T1
        return REFERENCE_T1 * (REFERENCE_J / self.J_q_tau) ** 2

    def resolved_horizon(self) -> float:
        return self.horizon if self.horizon is not None else HORIZON_T1_MULTIPLE * self.estimated_t1()

    def to_schedule(self) -> FftieSchedule:
        n_cycles = self.n_cycles or max(1, math.ceil(self.resolved_horizon() / self.cycle_time))
        record_stride = self.record_stride or max(1, math.ceil(n_cycles / TARGET_ROWS))
        return FftieSchedule(
            t_H=self.t_H,
            t_random=self.t_random,
            disorder_range=tuple(self.disorder_range),
            n_cycles=n_cycles,
            record_stride=min(record_stride, n_cycles),
            time_axis=self.time_axis,
            coherent_only=self.coherent_only,
        )

    def output_path(self) -> Path:
        return Path(self.output_dir)


class FitInput(BaseModel):
    csv_path: Path = Field(..., description="CSV in the emitted schema")
    observable: Literal["n_q", "coherence"] = Field("n_q", description="Column to fit when the file has several")
    offset_mode: str = Field("free", description="'free' or 'fixed=<value>'")
    window: Optional[List[float]] = Field(None, description="[lo, hi] time window")
    unit_MHz: float = Field(1.0, gt=0, description="Energy unit for the microsecond conversion")


class ScanInput(BaseModel):
    J_list: List[float] = Field(..., min_length=3, description="Qubit couplings to scan")

    @field_validator("J_list")
    @classmethod
    def _positive(cls, value: List[float]) -> List[float]:
        if any(j <= 0 for j in value):
            raise ValueError(f"couplings must be positive, got {value}")
        return value

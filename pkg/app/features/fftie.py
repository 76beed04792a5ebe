"""Full forward-time information erasure (FFTIE) trajectories.

One cycle is ``exp(-i H t_H)`` followed, unless the schedule is coherent
only, by ``exp(-i H_random t_random)`` with a fresh uniform draw of the
upsilon site energies. Observables are recorded after the erasure segment
of every ``record_stride``-th cycle, plus once at t = 0.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.errors import SimulationError
from app.features.analysis import coherence, ensemble_statistics, expect_nq
from app.features.basis import Configuration, Mode, ModeLayout, SectorSum, enumerate_sector, state_index
from app.features.model import (
    ModelParams,
    build_hamiltonian_blocks,
    build_number_operator,
    build_qubit_lowering,
    draw_site_energies,
    random_diagonal,
)
from app.features.propagation import (
    SpectralDecomposition,
    StateVector,
    apply_diagonal_phase,
    apply_propagator,
    decompose_blocks,
    evolve,
)

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1
NORM_TOL = 1e-8
SECTOR_TOL = 1e-10


class TimeAxis(str, Enum):
    INCLUDE_ERASURE = "include_erasure"
    EXCLUDE_ERASURE = "exclude_erasure"


class QubitState(str, Enum):
    ZERO = "zero"
    ONE = "one"
    PLUS = "plus"


class FftieSchedule(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    t_H: float = Field(2.0, ge=0, description="Duration of each coherent segment")
    t_random: float = Field(0.5, ge=0, description="Duration of each erasure segment")
    disorder_range: tuple[float, float] = Field((0.0, 3.0), description="Uniform range of the upsilon site energies")
    n_cycles: int = Field(..., ge=1, description="Number of FFTIE cycles")
    record_stride: int = Field(1, ge=1, description="Record observables every k cycles")
    time_axis: TimeAxis = Field(TimeAxis.INCLUDE_ERASURE, description="Whether erasure segments advance the clock")
    coherent_only: bool = Field(False, description="Pure evolution under H, no erasure segments")

    @model_validator(mode="after")
    def _check(self) -> "FftieSchedule":
        lo, hi = self.disorder_range
        if lo > hi:
            raise ValueError(f"disorder_range lower bound {lo} exceeds upper bound {hi}")
        if self.record_stride > self.n_cycles:
            raise ValueError(f"record_stride {self.record_stride} exceeds n_cycles {self.n_cycles}")
        return self

    @property
    def cycle_time(self) -> float:
        """Clock advance per cycle."""
        if self.coherent_only or self.time_axis is TimeAxis.EXCLUDE_ERASURE:
            return self.t_H
        return self.t_H + self.t_random

    @property
    def n_records(self) -> int:
        return self.n_cycles // self.record_stride + 1


class InitialState(BaseModel):
    """Product ket; bit ``i`` of ``tau_bits``/``upsilon_bits`` is chain site ``i``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    qubit_state: QubitState = Field(QubitState.ONE, description="Qubit state: zero, one or plus")
    tau_bits: int = Field(0, ge=0, description="Initial tau excitations (chain sites only)")
    upsilon_bits: int = Field(0b11, ge=0, description="Initial upsilon excitations")

    def configuration(self, qubit: bool) -> Configuration:
        return Configuration((self.tau_bits << 1) | int(qubit), self.upsilon_bits)

    def sectors(self, layout: ModeLayout) -> SectorSum:
        if self.tau_bits >> layout.chain_length or self.upsilon_bits >> layout.chain_length:
            raise SimulationError(f"initial bitmasks exceed a chain of length {layout.chain_length}")
        n_bath = self.tau_bits.bit_count()
        n_ups = self.upsilon_bits.bit_count()
        if self.qubit_state is QubitState.PLUS:
            n_taus = [n_bath, n_bath + 1]
        else:
            n_taus = [n_bath + int(self.qubit_state is QubitState.ONE)]
        return SectorSum.from_bases(enumerate_sector(layout, n, n_ups) for n in n_taus)

    def amplitudes(self, sectors: SectorSum) -> np.ndarray:
        psi = np.zeros(sectors.dimension, dtype=complex)
        if self.qubit_state is QubitState.PLUS:
            occupations, weight = (False, True), 1 / np.sqrt(2)
        else:
            occupations, weight = (self.qubit_state is QubitState.ONE,), 1.0
        for qubit in occupations:
            config = self.configuration(qubit)
            block = sectors.block_for(config.tau_bits.bit_count())
            psi[block.offset + state_index(block.basis, config)] = weight
        return psi


@dataclass
class Trajectory:
    seed: int
    times: np.ndarray
    n_q: np.ndarray
    coherence: Optional[np.ndarray] = None
    final_norm: float = 1.0


@dataclass
class Ensemble:
    trajectories: list[Trajectory]
    mean: dict[str, np.ndarray] = field(default_factory=dict)
    std: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.trajectories[0].times

    @property
    def observables(self) -> list[str]:
        return list(self.mean)


class PreparedModel:
    """Sectors, spectrum and observables shared read-only by all trajectories."""

    def __init__(self, params: ModelParams, init: InitialState):
        self.params = params
        self.init = init
        self.layout = ModeLayout(params.chain_length)
        self.sectors = init.sectors(self.layout)
        self.hamiltonians = build_hamiltonian_blocks(params, self.sectors)
        self.spectrum: SpectralDecomposition = decompose_blocks(self.hamiltonians)
        self.n_q = np.concatenate([build_number_operator(b.basis, Mode.qubit()) for b in self.sectors.blocks])
        self.psi0 = init.amplitudes(self.sectors)
        self.block_populations0 = self.block_populations(self.psi0)
        self.c_q = None
        if init.qubit_state is QubitState.PLUS:
            lower, upper = self.sectors.blocks
            self.c_q = build_qubit_lowering(upper.basis, lower.basis)
        logger.debug(
            "prepared %s",
            " + ".join(b.basis.describe() for b in self.sectors.blocks),
        )

    @lru_cache(maxsize=4)
    def propagator(self, t: float) -> np.ndarray:
        return self.spectrum.propagator(t)

    def erasure_diagonal(self, site_energies: np.ndarray) -> np.ndarray:
        """Diagonal of H_random over every block for one draw of upsilon energies."""
        return np.concatenate([random_diagonal(b.basis, site_energies) for b in self.sectors.blocks])

    @property
    def tracks_coherence(self) -> bool:
        return self.c_q is not None

    def block_populations(self, psi: np.ndarray) -> np.ndarray:
        return np.array([np.sum(np.abs(psi[b.slice]) ** 2) for b in self.sectors.blocks])

    def observe(self, psi: np.ndarray) -> tuple[float, Optional[float]]:
        n_q = expect_nq(psi, self.n_q)
        if self.c_q is None:
            return n_q, None
        return n_q, coherence(psi, self.sectors, self.c_q)


def child_seed(master_seed: int, index: int) -> int:
    """Stable 64-bit seed for trajectory ``index``, via numpy's SeedSequence hashing."""
    sequence = np.random.SeedSequence(master_seed & SEED_MASK, spawn_key=(index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _check_conservation(model: PreparedModel, psi: np.ndarray, seed: int) -> float:
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1) > NORM_TOL:
        logger.warning("trajectory %d: norm drifted to %.12f", seed, norm)
    drift = np.max(np.abs(model.block_populations(psi) - model.block_populations0))
    if drift > SECTOR_TOL:
        logger.warning("trajectory %d: sector populations drifted by %.2e", seed, drift)
    return norm


def simulate(model: PreparedModel, sched: FftieSchedule, seed: int) -> Trajectory:
    """Run one trajectory on an already prepared model."""
    rng = np.random.default_rng(seed & SEED_MASK)
    U = model.propagator(sched.t_H)
    lo, hi = sched.disorder_range
    L = model.layout.chain_length
    erasure_advances_clock = sched.time_axis is TimeAxis.INCLUDE_ERASURE

    times = np.empty(sched.n_records)
    n_q = np.empty(sched.n_records)
    coh = np.empty(sched.n_records) if model.tracks_coherence else None

    psi = StateVector(model.psi0.copy(), 0.0)
    times[0] = psi.time
    n_q[0], c = model.observe(psi.amplitudes)
    if coh is not None:
        coh[0] = c

    record = 1
    for cycle in range(1, sched.n_cycles + 1):
        psi = apply_propagator(U, psi, sched.t_H)
        if not sched.coherent_only:
            D = model.erasure_diagonal(draw_site_energies(L, lo, hi, rng))
            psi = apply_diagonal_phase(D, psi, sched.t_random, advance_time=erasure_advances_clock)
        if cycle % sched.record_stride == 0:
            times[record] = psi.time
            n_q[record], c = model.observe(psi.amplitudes)
            if coh is not None:
                coh[record] = c
            record += 1

    final_norm = _check_conservation(model, psi.amplitudes, seed)
    return Trajectory(seed=seed, times=times, n_q=n_q, coherence=coh, final_norm=final_norm)


def run_trajectory(params: ModelParams, init: InitialState, sched: FftieSchedule, seed: int) -> Trajectory:
    return simulate(PreparedModel(params, init), sched, seed)


def run_ensemble(
    params: ModelParams,
    init: InitialState,
    sched: FftieSchedule,
    n_traj: int,
    master_seed: int,
    workers: Optional[int] = None,
) -> Ensemble:
    """Independent trajectories with child seeds derived from ``master_seed``.

    Results do not depend on ``workers``: every trajectory owns its random
    stream and the reduction runs in trajectory-index order.
    """
    if n_traj < 1:
        raise ValueError(f"n_traj must be >= 1, got {n_traj}")
    model = PreparedModel(params, init)
    seeds = [child_seed(master_seed, k) for k in range(n_traj)]
    logger.info(
        "ensemble: %d trajectories, %d cycles, J_q_tau=%g, t_H=%g, t_random=%g",
        n_traj, sched.n_cycles, params.J_q_tau, sched.t_H, sched.t_random,
    )

    def task(k: int) -> Trajectory:
        traj = simulate(model, sched, seeds[k])
        logger.info("trajectory %d/%d done (n_q final %.4f)", k + 1, n_traj, traj.n_q[-1])
        return traj

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(task, range(n_traj)))
    else:
        trajectories = [task(k) for k in range(n_traj)]

    return summarize(trajectories)


def summarize(trajectories: list[Trajectory]) -> Ensemble:
    ensemble = Ensemble(trajectories)
    observables = ["n_q"]
    if trajectories[0].coherence is not None:
        observables.append("coherence")
    for name in observables:
        ensemble.mean[name], ensemble.std[name] = ensemble_statistics(trajectories, name)
    return ensemble


def run_coherent(
    params: ModelParams,
    init: InitialState,
    t_max: float,
    n_samples: int,
    chunk: int = 512,
) -> Trajectory:
    """``<n_q>`` under H alone at ``n_samples`` evenly spaced times in [0, t_max]."""
    if t_max <= 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")

    model = PreparedModel(params, init)
    V = model.spectrum.eigenvectors
    energies = model.spectrum.eigenvalues
    coefficients = V.conj().T @ model.psi0

    times = np.linspace(0.0, t_max, n_samples)
    n_q = np.empty(n_samples)
    coh = np.empty(n_samples) if model.tracks_coherence else None
    for start in range(0, n_samples, chunk):
        block = times[start:start + chunk]
        states = (np.exp(-1j * np.outer(block, energies)) * coefficients) @ V.T
        for i, psi in enumerate(states):
            n_q[start + i], c = model.observe(psi)
            if coh is not None:
                coh[start + i] = c

    final = evolve(model.spectrum, StateVector(model.psi0), t_max)
    return Trajectory(seed=0, times=times, n_q=n_q, coherence=coh, final_norm=final.norm)

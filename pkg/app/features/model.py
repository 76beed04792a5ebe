"""Hamiltonian, random dephasing generator and observable operators.

Operators are dense numpy arrays over a :class:`SectorBasis`; sector
dimensions stay below a few hundred. Diagonal operators are 1-D real
arrays indexed like ``basis.configs``.
"""

import logging
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.errors import DimensionMismatchError, SimulationError
from app.features.basis import Configuration, Mode, ModeLayout, SectorBasis, SectorSum

logger = logging.getLogger(__name__)

HermitianOperator = np.ndarray
DiagonalOperator = np.ndarray
SectorCouplingOperator = np.ndarray


class ModelParams(BaseModel):
    """Couplings and on-site energies, in units where J_tau = 1 and hbar = 1."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    J_tau: float = Field(1.0, description="Tau-species nearest-neighbour hopping")
    J_upsilon: float = Field(1.0, description="Upsilon-species nearest-neighbour hopping")
    U_tau_site: List[float] = Field(..., description="On-site tau energies U_{i,tau}, one per site")
    U_upsilon_site: List[float] = Field(..., description="On-site upsilon energies U_{i,upsilon}, one per site")
    U_cross: float = Field(-0.2, description="Same-site tau-upsilon density-density coupling")
    U_q: float = Field(0.0, description="Qubit energy")
    J_q_tau: float = Field(0.01, description="Qubit to tau-site-0 exchange coupling")

    @field_validator("U_tau_site", "U_upsilon_site")
    @classmethod
    def _non_empty(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("site energy lists must not be empty")
        return value

    @classmethod
    def uniform(cls, chain_length: int, **overrides) -> "ModelParams":
        """Zero on-site energies on every site; remaining fields from ``overrides`` or defaults."""
        fields = {
            "U_tau_site": [0.0] * chain_length,
            "U_upsilon_site": [0.0] * chain_length,
        }
        fields.update(overrides)
        return cls(**fields)

    @property
    def chain_length(self) -> int:
        return len(self.U_tau_site)


def _check_layout(params: ModelParams, layout: ModeLayout) -> None:
    L = layout.chain_length
    if len(params.U_tau_site) != L or len(params.U_upsilon_site) != L:
        raise DimensionMismatchError(
            f"site energy lists have lengths ({len(params.U_tau_site)}, {len(params.U_upsilon_site)}) "
            f"but the chain has L={L}"
        )


def _exchange_targets(params: ModelParams, config: Configuration, L: int):
    """Configurations reached from ``config`` by one hop, with their amplitudes."""
    tau, ups = config.tau_bits, config.upsilon_bits

    # qubit <-> tau site 0 (tau register bits 0 and 1)
    if (tau & 1) != ((tau >> 1) & 1):
        yield Configuration(tau ^ 0b11, ups), params.J_q_tau

    for i in range(L - 1):
        mask = 0b11 << (i + 1)
        if (tau & mask) not in (0, mask):
            yield Configuration(tau ^ mask, ups), params.J_tau

        mask = 0b11 << i
        if (ups & mask) not in (0, mask):
            yield Configuration(tau, ups ^ mask), params.J_upsilon


def diagonal_energies(params: ModelParams, basis: SectorBasis) -> np.ndarray:
    occ_tau = basis.occupations("tau")
    occ_ups = basis.occupations("upsilon")
    n_q, n_tau = occ_tau[:, 0], occ_tau[:, 1:]
    return (
        n_tau @ np.asarray(params.U_tau_site)
        + occ_ups @ np.asarray(params.U_upsilon_site)
        + params.U_cross * np.sum(n_tau * occ_ups, axis=1)
        + params.U_q * n_q
    )


def build_hamiltonian(params: ModelParams, basis: SectorBasis) -> HermitianOperator:
    """Dense H restricted to ``basis``.

    Hopping enters with coefficient ``+J`` on open-boundary bonds; hard-core
    bosons carry no fermionic sign.
    """
    _check_layout(params, basis.layout)
    L = basis.layout.chain_length
    H = np.zeros((basis.size, basis.size), dtype=complex)
    H[np.diag_indices(basis.size)] = diagonal_energies(params, basis)

    for k, config in enumerate(basis.configs):
        for target, amplitude in _exchange_targets(params, config, L):
            j = basis.index_of.get(target)
            if j is None:
                raise SimulationError(
                    f"hop from {config.label(basis.layout)} leaves {basis.describe()}"
                )
            H[j, k] += amplitude

    logger.debug("built H on %s", basis.describe())
    return H


def build_hamiltonian_blocks(params: ModelParams, sectors: SectorSum) -> list[HermitianOperator]:
    return [build_hamiltonian(params, block.basis) for block in sectors.blocks]


def draw_site_energies(chain_length: int, range_lo: float, range_hi: float, rng: np.random.Generator) -> np.ndarray:
    """One uniform draw per site, in ascending site order."""
    if range_lo > range_hi:
        raise ValueError(f"disorder range [{range_lo}, {range_hi}] is empty")
    return rng.uniform(range_lo, range_hi, size=chain_length)


def random_diagonal(basis: SectorBasis, site_energies: np.ndarray) -> DiagonalOperator:
    """Diagonal of H_random = sum_i u_i n_{i,upsilon} for given site energies ``u``."""
    if len(site_energies) != basis.layout.chain_length:
        raise DimensionMismatchError(
            f"{len(site_energies)} site energies for a chain of {basis.layout.chain_length}"
        )
    return basis.occupations("upsilon") @ site_energies


def draw_random_diagonal(
    basis: SectorBasis, range_lo: float, range_hi: float, rng: np.random.Generator
) -> DiagonalOperator:
    u = draw_site_energies(basis.layout.chain_length, range_lo, range_hi, rng)
    return random_diagonal(basis, u)


def build_number_operator(basis: SectorBasis, mode: Mode) -> DiagonalOperator:
    L = basis.layout.chain_length
    if mode.species == "qubit":
        return basis.occupations("tau")[:, 0]
    if not 0 <= mode.site < L:
        raise ValueError(f"site {mode.site} outside chain of length {L}")
    if mode.species == "tau":
        return basis.occupations("tau")[:, mode.site + 1]
    if mode.species == "upsilon":
        return basis.occupations("upsilon")[:, mode.site]
    raise ValueError(f"unknown mode species {mode.species!r}")


def build_qubit_lowering(source: SectorBasis, target: SectorBasis) -> SectorCouplingOperator:
    """Matrix of c_q from ``source`` (N_tau = n) into ``target`` (N_tau = n - 1)."""
    if source.layout != target.layout:
        raise DimensionMismatchError("qubit lowering between different layouts")
    if source.n_upsilon != target.n_upsilon:
        raise DimensionMismatchError(
            f"qubit lowering needs equal N_upsilon, got {source.n_upsilon} and {target.n_upsilon}"
        )
    if source.n_tau != target.n_tau + 1:
        raise DimensionMismatchError(
            f"qubit lowering maps N_tau={target.n_tau + 1} to {target.n_tau}, got {source.n_tau}"
        )

    c_q = np.zeros((target.size, source.size))
    for k, config in enumerate(source.configs):
        if config.qubit_occupied:
            lowered = Configuration(config.tau_bits & ~1, config.upsilon_bits)
            c_q[target.index_of[lowered], k] = 1.0
    return c_q

"""Conserved-number sectors of the qubit plus two-species TLS chain.

The qubit is stored as mode 0 of the tau register, so a tau bitmask has
``L + 1`` bits (bit 0 = qubit, bit ``i + 1`` = tau site ``i``) and an upsilon
bitmask has ``L`` bits (bit ``i`` = upsilon site ``i``). Site 0 is the left
end of the chain, the one coupled to the qubit.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from app.errors import SectorMembershipError

QUBIT_MODE = 0


@dataclass(frozen=True)
class ModeLayout:
    chain_length: int

    def __post_init__(self):
        if self.chain_length < 1:
            raise ValueError(f"chain_length must be >= 1, got {self.chain_length}")

    @property
    def tau_modes(self) -> int:
        return self.chain_length + 1

    @property
    def upsilon_modes(self) -> int:
        return self.chain_length


class Mode(NamedTuple):
    """A single hard-core mode: ``("qubit", 0)``, ``("tau", i)`` or ``("upsilon", i)``."""

    species: str
    site: int = 0

    @classmethod
    def qubit(cls) -> "Mode":
        return cls("qubit", 0)


@dataclass(frozen=True, order=True)
class Configuration:
    tau_bits: int
    upsilon_bits: int

    @property
    def qubit_occupied(self) -> bool:
        return bool(self.tau_bits & 1)

    @classmethod
    def from_sites(
        cls,
        qubit: bool = False,
        tau_sites: Iterable[int] = (),
        upsilon_sites: Iterable[int] = (),
    ) -> "Configuration":
        tau_bits = int(qubit)
        for site in tau_sites:
            tau_bits |= 1 << (site + 1)
        upsilon_bits = 0
        for site in upsilon_sites:
            upsilon_bits |= 1 << site
        return cls(tau_bits, upsilon_bits)

    def label(self, layout: ModeLayout) -> str:
        """Ket string with the leftmost character being site 0."""
        q = self.tau_bits & 1
        tau = "".join(str((self.tau_bits >> (i + 1)) & 1) for i in range(layout.chain_length))
        ups = "".join(str((self.upsilon_bits >> i) & 1) for i in range(layout.chain_length))
        return f"|{q}>_q|{tau}>_tau|{ups}>_ups"


@dataclass(frozen=True)
class SectorBasis:
    layout: ModeLayout
    n_tau: int
    n_upsilon: int
    configs: tuple[Configuration, ...]
    index_of: Mapping[Configuration, int] = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.configs)

    @property
    def tau_bits(self) -> np.ndarray:
        return np.fromiter((c.tau_bits for c in self.configs), dtype=np.int64, count=self.size)

    @property
    def upsilon_bits(self) -> np.ndarray:
        return np.fromiter((c.upsilon_bits for c in self.configs), dtype=np.int64, count=self.size)

    def occupations(self, species: str) -> np.ndarray:
        """0/1 occupation matrix of shape ``(size, modes)`` for ``"tau"`` or ``"upsilon"``.

        For ``"tau"`` column 0 is the qubit.
        """
        if species == "tau":
            bits, width = self.tau_bits, self.layout.tau_modes
        elif species == "upsilon":
            bits, width = self.upsilon_bits, self.layout.upsilon_modes
        else:
            raise ValueError(f"unknown species {species!r}")
        return ((bits[:, None] >> np.arange(width)) & 1).astype(float)

    def describe(self) -> str:
        return f"sector(L={self.layout.chain_length}, N_tau={self.n_tau}, N_ups={self.n_upsilon}, dim={self.size})"


class SectorBlock(NamedTuple):
    basis: SectorBasis
    offset: int

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.basis.size)


@dataclass(frozen=True)
class SectorSum:
    blocks: tuple[SectorBlock, ...]

    @classmethod
    def from_bases(cls, bases: Iterable[SectorBasis]) -> "SectorSum":
        blocks = []
        offset = 0
        for basis in bases:
            blocks.append(SectorBlock(basis, offset))
            offset += basis.size
        if not blocks:
            raise ValueError("a sector sum needs at least one block")
        layouts = {b.basis.layout for b in blocks}
        if len(layouts) != 1:
            raise ValueError("all blocks of a sector sum must share one layout")
        keys = [(b.basis.n_tau, b.basis.n_upsilon) for b in blocks]
        if len(set(keys)) != len(keys):
            raise ValueError(f"duplicate sectors in sum: {keys}")
        return cls(tuple(blocks))

    @property
    def layout(self) -> ModeLayout:
        return self.blocks[0].basis.layout

    @property
    def dimension(self) -> int:
        last = self.blocks[-1]
        return last.offset + last.basis.size

    def block_for(self, n_tau: int) -> SectorBlock:
        for block in self.blocks:
            if block.basis.n_tau == n_tau:
                return block
        raise KeyError(f"no block with N_tau={n_tau}")


def _bitmasks(width: int, count: int) -> list[int]:
    return sorted(sum(1 << i for i in chosen) for chosen in combinations(range(width), count))


@lru_cache(maxsize=64)
def enumerate_sector(layout: ModeLayout, n_tau: int, n_upsilon: int) -> SectorBasis:
    """All hard-core configurations with the given excitation numbers.

    Configurations are ordered lexicographically on ``(tau_bits, upsilon_bits)``.
    ``n_tau`` counts the qubit together with the tau sites.
    """
    if not 0 <= n_tau <= layout.tau_modes:
        raise ValueError(f"N_tau={n_tau} outside [0, {layout.tau_modes}]")
    if not 0 <= n_upsilon <= layout.upsilon_modes:
        raise ValueError(f"N_upsilon={n_upsilon} outside [0, {layout.upsilon_modes}]")

    configs = tuple(
        Configuration(t, u)
        for t in _bitmasks(layout.tau_modes, n_tau)
        for u in _bitmasks(layout.upsilon_modes, n_upsilon)
    )
    assert len(configs) == comb(layout.tau_modes, n_tau) * comb(layout.upsilon_modes, n_upsilon)
    index_of = {config: k for k, config in enumerate(configs)}
    return SectorBasis(layout, n_tau, n_upsilon, configs, index_of)


def state_index(basis: SectorBasis, config: Configuration) -> int:
    if config.tau_bits.bit_count() != basis.n_tau or config.upsilon_bits.bit_count() != basis.n_upsilon:
        raise SectorMembershipError(
            f"{config.label(basis.layout)} has popcounts "
            f"({config.tau_bits.bit_count()}, {config.upsilon_bits.bit_count()}), "
            f"expected ({basis.n_tau}, {basis.n_upsilon})"
        )
    try:
        return basis.index_of[config]
    except KeyError:
        raise SectorMembershipError(f"{config.label(basis.layout)} is not in {basis.describe()}") from None

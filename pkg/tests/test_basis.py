from collections import defaultdict
from math import comb

import pytest

from app.errors import SectorMembershipError
from app.features.basis import (
    Configuration,
    ModeLayout,
    SectorSum,
    enumerate_sector,
    state_index,
)


def _brute_force_sectors(L: int) -> dict[tuple[int, int], list[Configuration]]:
    sectors = defaultdict(list)
    for tau in range(2 ** (L + 1)):
        for ups in range(2**L):
            sectors[(tau.bit_count(), ups.bit_count())].append(Configuration(tau, ups))
    return sectors


@pytest.mark.parametrize("L", [1, 2, 3, 4])
def test_enumeration_matches_brute_force(L):
    layout = ModeLayout(L)
    for (n_tau, n_ups), expected in _brute_force_sectors(L).items():
        basis = enumerate_sector(layout, n_tau, n_ups)
        assert basis.size == comb(L + 1, n_tau) * comb(L, n_ups)
        assert list(basis.configs) == expected


def test_sector_size_and_bijection(layout3):
    basis = enumerate_sector(layout3, 1, 1)
    assert basis.size == 12
    for k, config in enumerate(basis.configs):
        assert basis.index_of[config] == k
        assert state_index(basis, config) == k


def test_state_index_ends(layout3):
    basis = enumerate_sector(layout3, 2, 1)
    assert state_index(basis, Configuration(0b0011, 0b001)) == 0
    assert state_index(basis, Configuration(0b1100, 0b100)) == basis.size - 1


def test_state_index_by_linear_scan(layout3):
    basis = enumerate_sector(layout3, 2, 2)
    config = Configuration.from_sites(qubit=True, tau_sites=[2], upsilon_sites=[0, 2])
    expected = next(k for k, c in enumerate(basis.configs) if c == config)
    assert state_index(basis, config) == expected


def test_state_index_rejects_foreign_config(layout3):
    basis = enumerate_sector(layout3, 1, 1)
    with pytest.raises(SectorMembershipError):
        state_index(basis, Configuration(0b11, 0b1))
    with pytest.raises(ValueError):
        state_index(basis, Configuration(0b1, 0b11))


def test_empty_sector_is_a_single_vacuum(layout3):
    basis = enumerate_sector(layout3, 0, 0)
    assert basis.configs == (Configuration(0, 0),)


@pytest.mark.parametrize("n_tau, n_ups", [(-1, 0), (5, 0), (0, 4)])
def test_out_of_range_counts(layout3, n_tau, n_ups):
    with pytest.raises(ValueError):
        enumerate_sector(layout3, n_tau, n_ups)


def test_layout_needs_a_site():
    with pytest.raises(ValueError):
        ModeLayout(0)


def test_configuration_from_sites_and_label(layout3):
    config = Configuration.from_sites(qubit=True, tau_sites=[0], upsilon_sites=[0, 1])
    assert config == Configuration(0b11, 0b11)
    assert config.qubit_occupied
    assert config.label(layout3) == "|1>_q|100>_tau|110>_ups"


def test_occupation_columns(layout3):
    basis = enumerate_sector(layout3, 1, 1)
    tau = basis.occupations("tau")
    ups = basis.occupations("upsilon")
    assert tau.shape == (basis.size, 4)
    assert ups.shape == (basis.size, 3)
    for row, config in zip(tau, basis.configs):
        assert row[0] == int(config.qubit_occupied)
    assert (tau.sum(axis=1) == 1).all()
    assert (ups.sum(axis=1) == 1).all()
    with pytest.raises(ValueError):
        basis.occupations("phonon")


def test_sector_sum_offsets(layout3):
    lower = enumerate_sector(layout3, 0, 2)
    upper = enumerate_sector(layout3, 1, 2)
    sectors = SectorSum.from_bases([lower, upper])
    assert sectors.dimension == lower.size + upper.size
    assert sectors.block_for(1).offset == lower.size
    assert sectors.block_for(1).slice == slice(lower.size, lower.size + upper.size)
    with pytest.raises(KeyError):
        sectors.block_for(3)
    with pytest.raises(ValueError):
        SectorSum.from_bases([lower, lower])

from math import pi

import numpy as np
import pytest

from app.errors import DimensionMismatchError
from app.features.analysis import (
    coherence,
    count_local_maxima,
    ensemble_statistics,
    expect_nq,
    first_revival_period,
    local_maxima,
    natural_time_to_microseconds,
    ratio_with_uncertainty,
    revivals_above,
    smooth,
    tail_mean,
    uncertainty_to_microseconds,
)
from app.features.basis import Mode, enumerate_sector
from app.features.fftie import InitialState, QubitState, Trajectory
from app.features.model import build_number_operator, build_qubit_lowering
from app.features.propagation import StateVector


def test_expect_nq_on_basis_states(layout3):
    basis = enumerate_sector(layout3, 1, 1)
    n_q = build_number_operator(basis, Mode.qubit())
    for k, config in enumerate(basis.configs):
        psi = np.zeros(basis.size, dtype=complex)
        psi[k] = 1.0
        assert expect_nq(psi, n_q) == int(config.qubit_occupied)
        assert expect_nq(StateVector(psi), n_q) == int(config.qubit_occupied)
    with pytest.raises(DimensionMismatchError):
        expect_nq(np.ones(3), n_q)


def test_expect_nq_is_clipped():
    assert expect_nq(np.array([1.0 + 1e-12, 0.0]), np.array([1.0, 0.0])) == 1.0


def _plus_state(layout, qubit_state=QubitState.PLUS):
    init = InitialState(qubit_state=qubit_state, upsilon_bits=0b11)
    sectors = init.sectors(layout)
    return init, sectors, init.amplitudes(sectors)


def test_coherence_of_plus_state(layout3):
    _, sectors, psi = _plus_state(layout3)
    lower, upper = sectors.blocks
    c_q = build_qubit_lowering(upper.basis, lower.basis)
    assert coherence(psi, sectors, c_q) == pytest.approx(1.0)

    n_q = np.concatenate([build_number_operator(b.basis, Mode.qubit()) for b in sectors.blocks])
    assert expect_nq(psi, n_q) == pytest.approx(0.5)


def test_coherence_vanishes_without_lower_component(layout3):
    _, sectors, psi = _plus_state(layout3)
    lower, upper = sectors.blocks
    psi[lower.slice] = 0
    psi /= np.linalg.norm(psi)
    c_q = build_qubit_lowering(upper.basis, lower.basis)
    assert coherence(psi, sectors, c_q) == 0.0


def test_coherence_needs_two_blocks(layout3):
    _, sectors, psi = _plus_state(layout3, QubitState.ONE)
    with pytest.raises(DimensionMismatchError):
        coherence(psi, sectors, np.zeros((1, 1)))


def _trajectory(seed, values, times=None):
    values = np.asarray(values, dtype=float)
    times = np.arange(len(values), dtype=float) if times is None else times
    return Trajectory(seed=seed, times=times, n_q=values)


def test_ensemble_statistics():
    trajectories = [_trajectory(0, [1.0, 0.5, 0.2]), _trajectory(1, [1.0, 0.3, 0.4])]
    mean, std = ensemble_statistics(trajectories)
    np.testing.assert_allclose(mean, [1.0, 0.4, 0.3])
    np.testing.assert_allclose(std, [0.0, np.sqrt(0.02), np.sqrt(0.02)])


def test_single_trajectory_has_no_spread():
    mean, std = ensemble_statistics([_trajectory(0, [1.0, 0.5])])
    np.testing.assert_array_equal(mean, [1.0, 0.5])
    np.testing.assert_array_equal(std, [0.0, 0.0])


def test_ensemble_statistics_rejects_bad_input():
    with pytest.raises(DimensionMismatchError):
        ensemble_statistics([_trajectory(0, [1.0, 0.5]), _trajectory(1, [1.0, 0.5], times=np.array([0.0, 2.0]))])
    with pytest.raises(ValueError):
        ensemble_statistics([])
    with pytest.raises(ValueError):
        ensemble_statistics([_trajectory(0, [1.0, 0.5])], observable="coherence")


def test_tail_mean():
    values = np.concatenate([np.ones(80), np.full(20, 0.125)])
    assert tail_mean(values) == pytest.approx(0.125)
    assert tail_mean(values, fraction=1.0) == pytest.approx(0.825)
    with pytest.raises(ValueError):
        tail_mean(values, fraction=0.0)


def test_local_maxima_of_a_cosine():
    t = np.linspace(0, 500, 5001)
    values = np.cos(2 * pi * t / 100)
    peaks = local_maxima(values, prominence=0.02)
    # index 0 counts as a maximum because the series starts by falling
    assert peaks[0] == 0
    assert count_local_maxima(values) == 5
    np.testing.assert_allclose(t[peaks], [0, 100, 200, 300, 400], atol=0.1)


def test_first_revival_period():
    t = np.linspace(0, 500, 5001)
    assert first_revival_period(t, np.cos(2 * pi * t / 100)) == pytest.approx(100, abs=0.2)
    assert first_revival_period(t, np.exp(-t / 50)) is None


def test_revivals_above():
    t = np.linspace(0, 1000, 10001)
    damped = 0.125 + 0.875 * np.exp(-t / 300) * np.cos(pi * t / 200) ** 2
    # peaks at t = 200, 400, 600 rise more than 0.1 above 0.225; the one at 800 does not
    assert revivals_above(t, damped, equilibrium=0.125, margin=0.1) == 3
    assert revivals_above(t, damped, equilibrium=0.125, margin=0.1, smoothing=5.0) == 3
    assert revivals_above(t, np.exp(-t / 50), equilibrium=0.0, margin=0.1) == 0


def test_noisy_monotone_decay_has_no_revivals():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 100000, 5001)
    noisy = 0.875 * np.exp(-t / 15000) + 0.125 + rng.normal(0, 0.015, size=t.size)
    assert revivals_above(t, noisy, equilibrium=0.125, margin=0.1, smoothing=500.0) == 0


def test_small_bump_after_decay_is_not_a_revival():
    t = np.linspace(0, 3000, 3001)
    bump = np.interp(t, [0, 757.5, 1111, 3000], [1.0, 0.2226, 0.259, 0.24])
    assert revivals_above(t, bump, equilibrium=0.125, margin=0.1) == 0
    revival = np.interp(t, [0, 757.5, 1111, 3000], [1.0, 0.15, 0.6, 0.2])
    assert revivals_above(t, revival, equilibrium=0.125, margin=0.1) == 1


def test_revivals_need_a_positive_margin():
    with pytest.raises(ValueError):
        revivals_above([0.0, 1.0], [1.0, 0.0], equilibrium=0.125, margin=0.0)


def test_smooth_moving_average():
    t = np.arange(10, dtype=float)
    values = np.where(t % 2 == 0, 1.0, 0.0)
    np.testing.assert_array_equal(smooth(t, values, 0.0), values)
    np.testing.assert_allclose(smooth(t, values, 2.0)[2:8], 0.5)


def test_microsecond_conversion():
    assert natural_time_to_microseconds(2 * pi) == pytest.approx(1.0)
    assert natural_time_to_microseconds(2 * pi, unit_MHz=2.0) == pytest.approx(0.5)
    assert uncertainty_to_microseconds(-2 * pi) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        natural_time_to_microseconds(1.0, unit_MHz=0.0)


def test_ratio_with_uncertainty():
    ratio, sigma = ratio_with_uncertainty(2.0, 0.2, 1.0, 0.1)
    assert ratio == pytest.approx(2.0)
    assert sigma == pytest.approx(2.0 * np.sqrt(0.02))

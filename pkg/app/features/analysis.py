"""Observables, ensemble statistics and unit conversion."""

from math import pi
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy.signal import find_peaks

from app.errors import DimensionMismatchError
from app.features.basis import SectorSum


def _amplitudes(psi) -> np.ndarray:
    return np.asarray(getattr(psi, "amplitudes", psi))


def expect_nq(psi, n_q_op: np.ndarray) -> float:
    """Qubit occupation ``sum_k |psi_k|^2 n_q(k)``, clipped to [0, 1].

    ``psi`` is a StateVector or a bare amplitude array.
    """
    amplitudes = _amplitudes(psi)
    if len(amplitudes) != len(n_q_op):
        raise DimensionMismatchError(f"state of dimension {len(amplitudes)} vs n_q of {len(n_q_op)}")
    value = float(np.dot(np.abs(amplitudes) ** 2, n_q_op))
    return min(max(value, 0.0), 1.0)


def coherence(psi, sectors: SectorSum, c_q: np.ndarray) -> float:
    """``sqrt(<sx>^2 + <sy>^2) = 2 |<psi_lower| c_q |psi_upper>|``.

    ``c_q`` maps the block with one more tau excitation (upper) into the
    block with one fewer (lower).
    """
    amplitudes = _amplitudes(psi)
    if len(sectors.blocks) < 2:
        raise DimensionMismatchError("coherence needs a state spanning two N_tau blocks")
    if len(amplitudes) != sectors.dimension:
        raise DimensionMismatchError(f"state of dimension {len(amplitudes)} vs sector sum of {sectors.dimension}")
    lower, upper = sectors.blocks[0], sectors.blocks[1]
    if c_q.shape != (lower.basis.size, upper.basis.size):
        raise DimensionMismatchError(f"c_q of shape {c_q.shape} does not connect the two blocks")
    value = 2.0 * abs(np.vdot(amplitudes[lower.slice], c_q @ amplitudes[upper.slice]))
    return min(value, 1.0)


def ensemble_statistics(trajectories: Sequence, observable: str = "n_q") -> tuple[np.ndarray, np.ndarray]:
    """Pointwise mean and sample standard deviation (n - 1) across trajectories.

    Every trajectory must have the same time stamps. A single trajectory has
    zero spread.
    """
    if not trajectories:
        raise ValueError("no trajectories to aggregate")
    times = np.asarray(trajectories[0].times)
    rows = []
    for traj in trajectories:
        series = getattr(traj, observable)
        if series is None:
            raise ValueError(f"trajectory {traj.seed} has no {observable!r} series")
        if len(traj.times) != len(times) or not np.array_equal(np.asarray(traj.times), times):
            raise DimensionMismatchError("trajectories have different time stamps")
        rows.append(np.asarray(series, dtype=float))

    data = np.vstack(rows)
    mean = data.mean(axis=0)
    if len(rows) == 1:
        return mean, np.zeros_like(mean)
    return mean, data.std(axis=0, ddof=1)


def tail_mean(values: Sequence[float], fraction: float = 0.2) -> float:
    values = np.asarray(values, dtype=float)
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    start = int(np.floor(len(values) * (1 - fraction)))
    return float(values[min(start, len(values) - 1):].mean())


def local_maxima(values: Sequence[float], prominence: float = 0.0) -> np.ndarray:
    """Indices of interior local maxima, plus index 0 when the series starts by falling."""
    values = np.asarray(values, dtype=float)
    peaks, _ = find_peaks(values, prominence=prominence if prominence > 0 else None)
    if len(values) > 1 and values[0] > values[1]:
        peaks = np.concatenate([[0], peaks])
    return peaks.astype(int)


def count_local_maxima(values: Sequence[float], prominence: float = 0.02) -> int:
    return int(len(local_maxima(values, prominence)))


def first_revival_period(times: Sequence[float], values: Sequence[float], prominence: float = 0.02) -> Optional[float]:
    """Time of the first interior maximum that follows a minimum.

    For a series starting at a maximum this is one oscillation period.
    Returns ``None`` without such a maximum.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    minima, _ = find_peaks(-values, prominence=prominence)
    maxima, _ = find_peaks(values, prominence=prominence)
    if not len(minima):
        return None
    later = maxima[maxima > minima[0]]
    if not len(later):
        return None
    return float(times[later[0]] - times[0])


def smooth(times: Sequence[float], values: Sequence[float], span: float) -> np.ndarray:
    """Centred moving average over ``span`` time units; ``span <= 0`` returns the values unchanged."""
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    if span <= 0 or len(values) < 2:
        return values
    window = max(1, int(round(span / np.median(np.diff(times)))))
    return pd.Series(values).rolling(window=window, center=True, min_periods=1).mean().to_numpy()


def revivals_above(
    times: Sequence[float],
    values: Sequence[float],
    equilibrium: float,
    margin: float,
    smoothing: float = 0.0,
) -> int:
    """Post-decay revivals of a relaxing curve.

    Counting starts once the (smoothed) curve has come within ``margin`` of
    ``equilibrium``. A revival is a climb to above ``equilibrium + margin``
    that also rises at least ``margin`` over the preceding minimum. The
    curve has to fall ``margin`` below that maximum before the next one
    counts.
    """
    if margin <= 0:
        raise ValueError(f"margin must be positive, got {margin}")
    level = equilibrium + margin
    curve = smooth(times, values, smoothing)

    below = np.flatnonzero(curve <= level)
    if not len(below):
        return 0
    count = 0
    low = high = curve[below[0]]
    reviving = False
    for value in curve[below[0]:]:
        if reviving:
            high = max(high, value)
            if high - value >= margin:
                reviving, low = False, value
        else:
            low = min(low, value)
            if value > level and value - low >= margin:
                reviving, high = True, value
                count += 1
    return count


def natural_time_to_microseconds(t: float, unit_MHz: float = 1.0) -> float:
    """Convert a model time (hbar = 1, energies in units of ``unit_MHz``) to microseconds."""
    if unit_MHz <= 0:
        raise ValueError(f"unit_MHz must be positive, got {unit_MHz}")
    return t / (2 * pi * unit_MHz)


def uncertainty_to_microseconds(sigma: float, unit_MHz: float = 1.0) -> float:
    return natural_time_to_microseconds(abs(sigma), unit_MHz)


def ratio_with_uncertainty(numerator: float, sigma_numerator: float, denominator: float, sigma_denominator: float) -> tuple[float, float]:
    """``numerator / denominator`` with relative errors added in quadrature."""
    ratio = numerator / denominator
    relative = np.hypot(sigma_numerator / numerator, sigma_denominator / denominator)
    return float(ratio), float(abs(ratio) * relative)

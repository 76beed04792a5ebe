"""Exponential decay fits for T1/T2 and the log-log scaling fit."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares
from sklearn.linear_model import LinearRegression

from app.errors import FitError
from app.features.analysis import local_maxima, tail_mean

logger = logging.getLogger(__name__)

MIN_POINTS = 10
PARAMETER_TOL = 1e-8
MAX_EVALUATIONS = 5000


@dataclass(frozen=True)
class OffsetMode:
    """Free offset, or offset held at ``fixed``."""

    fixed: Optional[float] = None

    @classmethod
    def parse(cls, text: str) -> "OffsetMode":
        text = text.strip()
        if text == "free":
            return cls()
        if text.startswith("fixed="):
            return cls(float(text.split("=", 1)[1]))
        raise ValueError(f"offset mode must be 'free' or 'fixed=<value>', got {text!r}")

    @property
    def is_free(self) -> bool:
        return self.fixed is None

    def __str__(self) -> str:
        return "free" if self.is_free else f"fixed={self.fixed:g}"


@dataclass(frozen=True)
class FitResult:
    """``A exp(-(t - t_ref) / T) + C`` with one-sigma uncertainties.

    ``t_ref`` is the first fitted time, so ``amplitude`` is the excess over
    the offset at the start of the fit window.
    """

    amplitude: float
    time_constant: float
    offset: float
    sigma_amplitude: float
    sigma_time_constant: float
    sigma_offset: float
    residual_norm: float
    converged: bool
    n_points: int
    t_ref: float = 0.0
    message: str = ""

    def evaluate(self, times: Sequence[float]) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        return self.amplitude * np.exp(-(times - self.t_ref) / self.time_constant) + self.offset

    def as_dict(self) -> dict:
        return {
            "A": self.amplitude,
            "sigma_A": self.sigma_amplitude,
            "T": self.time_constant,
            "sigma_T": self.sigma_time_constant,
            "C": self.offset,
            "sigma_C": self.sigma_offset,
            "t_ref": self.t_ref,
            "residual": self.residual_norm,
            "converged": self.converged,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class ScalingResult:
    """``T = prefactor * J ** exponent`` fitted in log-log space."""

    exponent: float
    prefactor: float
    sigma_exponent: float
    sigma_prefactor: float
    residual_norm: float
    J_values: tuple[float, ...] = field(default_factory=tuple)
    T_values: tuple[float, ...] = field(default_factory=tuple)

    def predict(self, J: float) -> float:
        return float(self.prefactor * J**self.exponent)


def _failed(n_points: int, message: str, t_ref: float = 0.0) -> FitResult:
    nan = float("nan")
    return FitResult(nan, nan, nan, nan, nan, nan, nan, False, n_points, t_ref, message)


def _initial_guess(t: np.ndarray, y: np.ndarray, offset: float) -> tuple[float, float]:
    """Amplitude and time constant from a log-linear regression of ``y - offset``."""
    excess = y - offset
    sign = 1.0 if excess[0] >= 0 else -1.0
    magnitude = sign * excess
    usable = magnitude > 0.1 * magnitude.max()
    # keep only the leading run above threshold; the tail fluctuates around zero
    cut = np.argmin(usable) if not usable.all() else len(usable)
    span = t[-1] - t[0]
    if cut < 2:
        return float(excess[0]), span / 3

    model = LinearRegression()
    model.fit(t[:cut].reshape((-1, 1)), np.log(magnitude[:cut]))
    slope = model.coef_[0]
    if slope >= 0:
        return float(excess[0]), span / 3
    return float(sign * np.exp(model.intercept_)), float(-1.0 / slope)


def _least_squares_fit(t: np.ndarray, y: np.ndarray, offset_mode: OffsetMode, min_points: int) -> FitResult:
    if len(t) != len(y):
        raise FitError(f"times and values differ in length ({len(t)} vs {len(y)})")
    if len(t) < min_points:
        raise FitError(f"need at least {min_points} points, got {len(t)}")
    if np.ptp(y) == 0:
        raise FitError("values are all equal; nothing decays")

    t_ref = float(t[0])
    s = t - t_ref
    C0 = tail_mean(y) if offset_mode.is_free else offset_mode.fixed
    A0, T0 = _initial_guess(s, y, C0)

    if offset_mode.is_free:
        def residuals(p):
            A, T, C = p
            return A * np.exp(-s / T) + C - y

        def jacobian(p):
            A, T, C = p
            e = np.exp(-s / T)
            return np.column_stack([e, A * e * s / T**2, np.ones_like(s)])

        x0 = [A0, T0, C0]
    else:
        C_fixed = offset_mode.fixed

        def residuals(p):
            A, T = p
            return A * np.exp(-s / T) + C_fixed - y

        def jacobian(p):
            A, T = p
            e = np.exp(-s / T)
            return np.column_stack([e, A * e * s / T**2])

        x0 = [A0, T0]

    with np.errstate(over="ignore", invalid="ignore"):
        result = least_squares(
            residuals,
            x0,
            jac=jacobian,
            method="lm",
            x_scale="jac",
            xtol=PARAMETER_TOL,
            ftol=PARAMETER_TOL,
            max_nfev=MAX_EVALUATIONS,
        )

    params = result.x
    if len(params) == 2:
        params = np.array([params[0], params[1], offset_mode.fixed])
    A, T, C = (float(v) for v in params)
    residual_norm = float(np.linalg.norm(result.fun))

    dof = len(y) - len(result.x)
    if dof > 0:
        variance = 2 * result.cost / dof
        covariance = variance * np.linalg.pinv(result.jac.T @ result.jac)
        sigmas = np.sqrt(np.clip(np.diag(covariance), 0, None))
    else:
        sigmas = np.full(len(result.x), np.inf)
    if len(sigmas) == 2:
        sigmas = np.append(sigmas, 0.0)

    converged = bool(result.success) and np.all(np.isfinite(params))
    message = result.message
    if converged and T <= 0:
        converged = False
        message = f"stationary point with non-positive time constant T={T:.6g}"
    if not converged:
        logger.warning("exponential fit did not converge: %s", message)

    return FitResult(
        amplitude=A,
        time_constant=T,
        offset=C,
        sigma_amplitude=float(sigmas[0]),
        sigma_time_constant=float(sigmas[1]),
        sigma_offset=float(sigmas[2]),
        residual_norm=residual_norm,
        converged=converged,
        n_points=len(y),
        t_ref=t_ref,
        message=str(message),
    )


def _apply_window(t: np.ndarray, y: np.ndarray, window: Optional[tuple[float, float]]):
    if window is None:
        return t, y
    lo, hi = window
    mask = (t >= lo) & (t <= hi)
    return t[mask], y[mask]


def fit_exponential(
    times: Sequence[float],
    values: Sequence[float],
    offset_mode: OffsetMode = OffsetMode(),
    window: Optional[tuple[float, float]] = None,
) -> FitResult:
    """Least-squares fit of ``A exp(-t/T) + C``.

    Starts from a log-linear regression against the long-time mean and
    refines with Levenberg-Marquardt. Uncertainties come from the
    linearized covariance at the optimum.
    """
    t, y = _apply_window(np.asarray(times, dtype=float), np.asarray(values, dtype=float), window)
    return _least_squares_fit(t, y, offset_mode, MIN_POINTS)


def fit_envelope(
    times: Sequence[float],
    values: Sequence[float],
    offset_mode: OffsetMode = OffsetMode(),
    window: Optional[tuple[float, float]] = None,
    prominence: float = 0.01,
) -> FitResult:
    """Exponential through successive local maxima of an oscillating decay."""
    t, y = _apply_window(np.asarray(times, dtype=float), np.asarray(values, dtype=float), window)
    peaks = local_maxima(y, prominence)
    n_params = 3 if offset_mode.is_free else 2
    if len(peaks) < max(3, n_params):
        return _failed(len(peaks), f"only {len(peaks)} local maxima")
    try:
        return _least_squares_fit(t[peaks], y[peaks], offset_mode, max(3, n_params))
    except FitError as exc:
        return _failed(len(peaks), str(exc))


def fit_power_law(J_values: Sequence[float], T_values: Sequence[float]) -> ScalingResult:
    """Linear regression of ``log T`` on ``log J``."""
    J = np.asarray(J_values, dtype=float)
    T = np.asarray(T_values, dtype=float)
    if len(J) != len(T):
        raise FitError(f"{len(J)} couplings but {len(T)} times")
    if len(J) < 3:
        raise FitError(f"need at least 3 points for a scaling fit, got {len(J)}")
    if np.any(J <= 0) or np.any(T <= 0) or not np.all(np.isfinite(T)):
        raise FitError("scaling fit needs strictly positive, finite inputs")

    x, y = np.log(J), np.log(T)
    model = LinearRegression()
    model.fit(x.reshape((-1, 1)), y)
    slope, intercept = float(model.coef_[0]), float(model.intercept_)

    residuals = y - model.predict(x.reshape((-1, 1)))
    n = len(x)
    sxx = np.sum((x - x.mean()) ** 2)
    if sxx == 0:
        raise FitError("all couplings are equal")
    variance = np.sum(residuals**2) / (n - 2) if n > 2 else 0.0
    sigma_slope = float(np.sqrt(variance / sxx))
    sigma_intercept = float(np.sqrt(variance * (1.0 / n + x.mean() ** 2 / sxx)))
    prefactor = float(np.exp(intercept))

    return ScalingResult(
        exponent=slope,
        prefactor=prefactor,
        sigma_exponent=sigma_slope,
        sigma_prefactor=prefactor * sigma_intercept,
        residual_norm=float(np.linalg.norm(residuals)),
        J_values=tuple(float(v) for v in J),
        T_values=tuple(float(v) for v in T),
    )

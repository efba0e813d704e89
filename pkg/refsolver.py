"""
Method-of-lines reference solver for u_t - ν u_xx + α u - ε u^n = 0 on a
periodic grid, and the PDE residual evaluator used by the claim checks.

Time stepping is second-order exponential time differencing (ETD2RK): the
stiff linear part e^{(-4π²νs² - α)dt} is applied exactly and ε u^n gets a
predictor/corrector. The φ-function coefficients are contour averages over
roots of unity, which keeps them accurate as dt·L → 0.
"""

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from fields import Field, Grid, spectral_derivative
from kernels import NwsParams

logger = logging.getLogger(__name__)

OVERFLOW_GUARD = 1e12


class BlowUpError(RuntimeError):
    """‖u‖∞ exceeded the overflow guard; carries the last valid state."""

    def __init__(self, message: str, state: Field, time: float):
        super().__init__(message)
        self.state = state
        self.time = time


@dataclass(frozen=True)
class Trajectory:
    times: Tuple[float, ...]
    states: Tuple[Field, ...]
    blow_up: bool = False
    blow_up_time: Optional[float] = None

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def final(self) -> Field:
        return self.states[-1]


def _phi_coefficients(lin: np.ndarray, dt: float, n_roots: int = 32) -> Tuple[np.ndarray, np.ndarray]:
    """dt·φ1(dt·L) and dt·φ2(dt·L) by contour averaging."""
    roots = np.exp(1j * np.pi * (np.arange(n_roots) + 0.5) / n_roots)
    lr = dt * lin[:, None] + roots[None, :]
    exp_lr = np.exp(lr)
    phi1 = ((exp_lr - 1.0) / lr).mean(axis=1).real
    phi2 = ((exp_lr - 1.0 - lr) / lr ** 2).mean(axis=1).real
    return dt * phi1, dt * phi2


@dataclass
class _Stepper:
    """Cached ETD2RK coefficients for one (grid, dt, params) combination."""

    grid: Grid
    dt: float
    params: NwsParams
    exp_lin: np.ndarray = field(init=False)
    coeff_a: np.ndarray = field(init=False)
    coeff_b: np.ndarray = field(init=False)

    def __post_init__(self):
        # unshifted order, matching np.fft.fft of ifftshift(values)
        s = np.fft.ifftshift(self.grid.dual().frequencies)
        lin = -4.0 * np.pi ** 2 * self.params.nu * s ** 2 - self.params.alpha
        self.exp_lin = np.exp(self.dt * lin)
        self.coeff_a, self.coeff_b = _phi_coefficients(lin, self.dt)

    def _source_hat(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fft(self.params.epsilon * np.power(values, self.params.n))

    def advance(self, values: np.ndarray) -> np.ndarray:
        """One step on raw samples in ifftshift order; overflow is left for the guard."""
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.fft.fft(values)
            n_v = self._source_hat(values)
            a_hat = self.exp_lin * v + self.coeff_a * n_v
            n_a = self._source_hat(np.fft.ifft(a_hat).real)
            return np.fft.ifft(a_hat + self.coeff_b * (n_a - n_v)).real

    def advance_field(self, state: Field) -> np.ndarray:
        return np.fft.fftshift(self.advance(np.fft.ifftshift(state.values)))


def _guard(values: np.ndarray, state: Field, t: float) -> None:
    if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > OVERFLOW_GUARD:
        raise BlowUpError(f"solution exceeded {OVERFLOW_GUARD:g} after t={t!r}", state, t)


def step(state: Field, t: float, dt: float, params: NwsParams) -> Field:
    """Advance one ETD2RK step of size dt from time t."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    values = _Stepper(state.grid, dt, params).advance_field(state)
    _guard(values, state, t)
    return Field(state.grid, values, time_stamp=t + dt)


def solve(initial: Field, t_end: float, dt: float, params: NwsParams,
          record_every: int = 1) -> Trajectory:
    """
    Repeated steps from t = initial.time_stamp up to t_end, recording every
    record_every steps and always the final state. Blow-up truncates the
    trajectory and sets the flag.
    """
    if not dt > 0 or not t_end > 0:
        raise ValueError(f"need dt > 0 and t_end > 0, got dt={dt}, t_end={t_end}")
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    t0 = initial.time_stamp
    span = t_end - t0
    if not span > 0:
        raise ValueError(f"t_end={t_end} must exceed the initial time {t0}")
    n_steps = max(1, int(np.ceil(span / dt - 1e-9)))
    last_dt = span - (n_steps - 1) * dt
    stepper = _Stepper(initial.grid, dt, params)
    times: List[float] = [t0]
    states: List[Field] = [initial]
    state = initial
    for index in range(1, n_steps + 1):
        t = t0 + (index - 1) * dt
        try:
            if index == n_steps and abs(last_dt - dt) > 1e-12 * dt:
                state = step(state, t, last_dt, params)
            else:
                values = stepper.advance_field(state)
                _guard(values, state, t)
                state = Field(state.grid, values, time_stamp=t0 + index * dt)
        except BlowUpError as exc:
            logger.warning("trajectory truncated by blow-up at t=%r", exc.time)
            return Trajectory(tuple(times), tuple(states), blow_up=True, blow_up_time=exc.time)
        if index % record_every == 0 or index == n_steps:
            times.append(state.time_stamp)
            states.append(state)
    return Trajectory(tuple(times), tuple(states))


def pde_residual(u: Callable[[float], Field], t: float, params: NwsParams,
                 h: Optional[float] = None) -> Field:
    """u_t − ν u_xx + α u − ε u^n with central differences in t and spectral u_xx."""
    if not t > 0:
        raise ValueError(f"residual needs t > 0, got {t}")
    h = 1e-5 * max(t, 1.0) if h is None else h
    if not 0 < h < t:
        raise ValueError(f"finite-difference step must lie in (0, t), got h={h}")
    now = u(t)
    u_t = (u(t + h).values - u(t - h).values) / (2.0 * h)
    u_xx = spectral_derivative(now, 2).values
    values = u_t - params.nu * u_xx + params.alpha * now.values - params.epsilon * np.power(now.values, params.n)
    return Field(now.grid, values, time_stamp=t)


def pde_residual_with_error(u: Callable[[float], Field], t: float,
                            params: NwsParams, h: Optional[float] = None) -> Tuple[Field, float]:
    """Residual plus a Richardson estimate (steps h and 2h) of its finite-difference error."""
    h = 1e-5 * max(t, 1.0) if h is None else h
    fine = pde_residual(u, t, params, h)
    coarse = pde_residual(u, t, params, 2.0 * h)
    scale = max(u(t).sup_norm(), 1.0)
    error = float(np.max(np.abs(fine.values - coarse.values))) / 3.0
    rounding = 8.0 * np.finfo(float).eps * scale / h
    return fine, error + rounding


def departure_rate(params: NwsParams, grid: Grid, perturbation: float = 1e-6,
                   t_end: float = 2.0, dt: float = 0.01) -> float:
    """Measured exponential rate at which a uniform perturbation leaves u*."""
    u_star = params.equilibrium
    initial = Field(grid, np.full(grid.n_points, u_star * (1.0 + perturbation)))
    trajectory = solve(initial, t_end, dt, params)
    half = len(trajectory.times) // 2
    t1, t2 = trajectory.times[half], trajectory.times[-1]
    d1 = abs(trajectory.states[half].values.mean() - u_star)
    d2 = abs(trajectory.final.values.mean() - u_star)
    return float(np.log(d2 / d1) / (t2 - t1))


def trajectory_to_csv(trajectory: Trajectory, path: str) -> str:
    """Long format: one (t, x, u) row per sample."""
    with open(path, "w", newline="") as handle:
        handle.write(f"# blow_up={trajectory.blow_up} blow_up_time={trajectory.blow_up_time!r}\n")
        writer = csv.writer(handle)
        writer.writerow(["t", "x", "u"])
        for t, state in zip(trajectory.times, trajectory.states):
            for x, value in zip(state.x, state.values):
                writer.writerow([repr(float(t)), repr(float(x)), repr(float(value))])
    return path

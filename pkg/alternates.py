"""
Alternate reductions of the codomain equation: the Fujita-type spectral
evolution, the separated time ODE, the unity-convolution reduction, the
linear delta ansatz and the Neumann-series expansion of the n = 2 solution.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from codomain import erf_ratio
from convolve import convolve_direct, serial_self_convolve
from fields import Field, Grid, SpectralField
from kernels import NwsParams, linear_propagator, spectral_kernel
from refsolver import pde_residual_with_error
from reports import ClaimReport, inconclusive_report, make_report, numerical_floor

logger = logging.getLogger(__name__)

FUJITA_GUARD = 1e12
DECAY_LEVEL = 1e-12

FUJITA_REF = "Eq. 9: F' = ε g^{n-1} e^{-α(n-1)t} (F∗…∗F) has zero as a potential solution"
SEPARATED_REF = "Eq. 10: h' = ε/(4√(πν)) e^{-αt} t^{-1/2} h²"
UNITY_REF = "Eq. 11: (1∗H)(s) = ∫H(s,t) ds ~ K(t)"
ANSATZ_REF = "Eqs. 12-13: A K(t) (δ∗G e^{-αt}) = A K(t) G e^{-αt}, A must be null"
NEUMANN_REF = "Neumann expansion: the argument must be strictly less than absolute unity"


# --- Fujita-type spectral evolution -------------------------------------------

class FujitaBlowUpError(RuntimeError):
    """|F| crossed the overflow guard; carries the last valid state and its time."""

    def __init__(self, message: str, state: SpectralField, time: float):
        super().__init__(message)
        self.state = state
        self.time = time


@dataclass(frozen=True)
class FujitaRun:
    times: Tuple[float, ...]
    states: Tuple[SpectralField, ...]
    blow_up: bool = False
    blow_up_time: Optional[float] = None

    @property
    def final(self) -> SpectralField:
        return self.states[-1]


def _fujita_rate(F: SpectralField, t: float, params: NwsParams) -> np.ndarray:
    # the n-1 in the subscript counts convolutions, so n factors of F
    n = params.n
    g = spectral_kernel(F.s, t, params)
    serial = serial_self_convolve(F, n).values
    return params.epsilon * np.power(g, n - 1) * np.exp(-params.alpha * (n - 1) * t) * serial


def fujita_step(F: SpectralField, t: float, dt: float, params: NwsParams) -> SpectralField:
    """One explicit midpoint step of the Fujita-form equation."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = _fujita_rate(F, t, params)
            half = F.with_values(F.values + 0.5 * dt * k1)
            k2 = _fujita_rate(half, t + 0.5 * dt, params)
            values = F.values + dt * k2
    except ValueError as exc:
        # an intermediate field overflowed and was rejected as non-finite
        raise FujitaBlowUpError(f"Fujita state overflowed after t={t!r}", F, t) from exc
    if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > FUJITA_GUARD:
        raise FujitaBlowUpError(f"Fujita state exceeded {FUJITA_GUARD:g} after t={t!r}", F, t)
    return F.with_values(values, time_stamp=t + dt)


def integrate_fujita(F0: SpectralField, t_end: float, dt: float, params: NwsParams) -> FujitaRun:
    """Repeated fujita_step from F0.time_stamp to t_end; blow-up truncates the run."""
    if not dt > 0 or not t_end > F0.time_stamp:
        raise ValueError(f"need dt > 0 and t_end > {F0.time_stamp}, got dt={dt}, t_end={t_end}")
    n_steps = max(1, int(round((t_end - F0.time_stamp) / dt)))
    step_size = (t_end - F0.time_stamp) / n_steps
    times: List[float] = [F0.time_stamp]
    states: List[SpectralField] = [F0]
    state = F0
    for index in range(n_steps):
        t = F0.time_stamp + index * step_size
        try:
            state = fujita_step(state, t, step_size, params)
        except FujitaBlowUpError as exc:
            logger.warning("Fujita run truncated by blow-up at t=%r", exc.time)
            return FujitaRun(tuple(times), tuple(states), blow_up=True, blow_up_time=exc.time)
        times.append(state.time_stamp)
        states.append(state)
    return FujitaRun(tuple(times), tuple(states))


def fujita_convergence_order(F0: SpectralField, t_end: float, dt: float, params: NwsParams) -> float:
    """‖F_dt − F_dt/2‖ / ‖F_dt/2 − F_dt/4‖ at t_end; about 4 for a second-order scheme."""
    finals = [integrate_fujita(F0, t_end, dt / 2 ** k, params) for k in range(3)]
    if any(run.blow_up for run in finals):
        raise FujitaBlowUpError("convergence study blew up", finals[-1].final, finals[-1].times[-1])
    coarse = np.max(np.abs(finals[0].final.values - finals[1].final.values))
    fine = np.max(np.abs(finals[1].final.values - finals[2].final.values))
    if fine == 0:
        return float("inf") if coarse > 0 else 0.0
    return float(coarse / fine)


# --- Separated time ODE -------------------------------------------------------

class SeparatedPoleError(RuntimeError):
    """The separated solution was evaluated at or beyond its blow-up time."""


@dataclass(frozen=True)
class SeparatedState:
    """Initial value h(0+) and, when it exists, the blow-up time of h."""

    h0: float
    blow_up_time: Optional[float] = None

    def __post_init__(self):
        if self.blow_up_time is not None and not self.blow_up_time > 0:
            raise ValueError(f"blow_up_time must be positive, got {self.blow_up_time}")


def _separated_threshold(h0: float, params: NwsParams) -> Optional[float]:
    """erf(√(αt*)) must reach this value for a pole; None when it never can."""
    product = h0 * params.epsilon
    if product <= 0:
        return None
    threshold = 4.0 * np.sqrt(params.nu * params.alpha) / product
    return threshold if threshold < 1.0 else None


def separated_blow_up_time(h0: float, params: NwsParams) -> Optional[float]:
    """Root of erf(√(αt)) = 4√(να)/(h0 ε) by bracketing bisection; None if no pole exists."""
    threshold = _separated_threshold(h0, params)
    if threshold is None:
        return None
    upper = 1.0 / params.alpha
    while special.erf(np.sqrt(params.alpha * upper)) < threshold:
        upper *= 2.0
    root = optimize.brentq(
        lambda t: special.erf(np.sqrt(params.alpha * t)) - threshold,
        0.0, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps,
    )
    return float(root)


def separated_state(h0: float, params: NwsParams) -> SeparatedState:
    return SeparatedState(h0=float(h0), blow_up_time=separated_blow_up_time(h0, params))


def separated_solution(t: float, state: SeparatedState, params: NwsParams) -> float:
    """h(t) = h0 / (1 − h0 ε erf(√(αt)) / (4√(να)))."""
    if not t > 0:
        raise ValueError(f"separated solution needs t > 0, got {t}")
    if state.blow_up_time is not None and t >= state.blow_up_time:
        raise SeparatedPoleError(f"t={t!r} is at or past the blow-up time {state.blow_up_time!r}")
    if state.h0 == 0:
        return 0.0
    denominator = 1.0 - state.h0 * params.epsilon * special.erf(np.sqrt(params.alpha * t)) / (
        4.0 * np.sqrt(params.nu * params.alpha)
    )
    if denominator <= 0:
        raise SeparatedPoleError(f"separated solution has passed its pole before t={t!r}")
    return float(state.h0 / denominator)


def separated_rk4(state: SeparatedState, t_values: Sequence[float], params: NwsParams,
                  max_step: float = 1e-3) -> np.ndarray:
    """
    Classical RK4 on the separated ODE in τ = √t, where it reads
    dh/dτ = ε/(2√(πν)) e^{-ατ²} h² with no endpoint singularity.
    """
    targets = np.sqrt(np.asarray(t_values, dtype=float))
    if np.any(np.diff(targets) < 0) or np.any(targets <= 0):
        raise ValueError("t_values must be positive and nondecreasing")
    coefficient = params.epsilon / (2.0 * np.sqrt(np.pi * params.nu))

    def rate(tau: float, h: float) -> float:
        return coefficient * np.exp(-params.alpha * tau * tau) * h * h

    out = np.empty_like(targets)
    tau, h = 0.0, float(state.h0)
    for index, target in enumerate(targets):
        span = target - tau
        n_steps = int(np.ceil(span / max_step)) if span > 0 else 0
        for _ in range(n_steps):
            d = span / n_steps
            k1 = rate(tau, h)
            k2 = rate(tau + 0.5 * d, h + 0.5 * d * k1)
            k3 = rate(tau + 0.5 * d, h + 0.5 * d * k2)
            k4 = rate(tau + d, h + d * k3)
            h += d * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            tau += d
        tau = target
        out[index] = h
    return out


# --- Unity convolution --------------------------------------------------------

def _edge_magnitude(H: SpectralField) -> float:
    return float(max(abs(H.values[0]), abs(H.values[-1])))


def unity_convolution(H: SpectralField) -> float:
    """(1∗H)(s) = ∫H ds by the periodic trapezoid rule."""
    edge = _edge_magnitude(H)
    if edge > DECAY_LEVEL:
        logger.warning("H has not decayed at the grid edges (|H|=%.3g); integral is truncated", edge)
    return float(np.real(H.integral()))


def check_unity_convolution(H: SpectralField) -> ClaimReport:
    """Pointwise (1∗H)(s) must be s-independent and equal to ∫H ds."""
    ones = H.with_values(np.ones(H.sgrid.n_points))
    pointwise = np.real(convolve_direct(ones, H).values)
    integral = unity_convolution(H)
    spread = float(pointwise.max() - pointwise.min())
    edge = _edge_magnitude(H)
    metadata = {
        "integral": integral,
        "spread": spread,
        "edge_magnitude": edge,
        "decay_warning": edge > DECAY_LEVEL,
        "n_points": H.sgrid.n_points,
        "time_stamp": H.time_stamp,
    }
    scale = max(abs(integral), float(np.max(np.abs(pointwise))))
    if scale == 0:
        return make_report("unity-convolution", UNITY_REF, 0.0, 0.0, metadata)
    return make_report(
        "unity-convolution", UNITY_REF, spread / scale, numerical_floor(H.sgrid.n_points), metadata
    )


# --- Linear delta ansatz ------------------------------------------------------

def _unit_time(_t: float) -> float:
    return 1.0


def check_linear_ansatz(A: float, K: Optional[Callable[[float], float]], params: NwsParams,
                        grid: Grid, t_samples: Iterable[float]) -> ClaimReport:
    """
    Full PDE residual of u = A K(t) G(x,t) e^{-αt}.

    The linear part cancels, so whatever survives is the nonlinear term
    ε u^n; the metadata records it scaled by |A|^n so the A-dependence is
    visible.
    """
    K = K or _unit_time
    t_samples = [float(t) for t in t_samples]
    if not t_samples or min(t_samples) <= 0:
        raise ValueError("t_samples must be nonempty and positive")

    def candidate(t: float) -> Field:
        return Field.from_function(grid, lambda x: A * K(t) * linear_propagator(x, t, params), t)

    worst, worst_error, nonlinear = 0.0, 0.0, 0.0
    by_time = []
    for t in t_samples:
        residual, error = pde_residual_with_error(candidate, t, params)
        measured = residual.sup_norm()
        source = abs(params.epsilon) * float(np.max(np.abs(np.power(candidate(t).values, params.n))))
        by_time.append({"t": t, "residual": measured, "nonlinear_term": source})
        worst = max(worst, measured)
        worst_error = max(worst_error, error)
        nonlinear = max(nonlinear, source)
    metadata = {
        "A": A,
        "epsilon": params.epsilon,
        "n": params.n,
        "n_points": grid.n_points,
        "length": grid.length,
        "by_time": by_time,
        "nonlinear_term": nonlinear,
    }
    if A != 0:
        metadata["residual_over_A_n"] = worst / abs(A) ** params.n
    return make_report("linear-ansatz", ANSATZ_REF, worst, worst_error, metadata)


# --- Neumann series -----------------------------------------------------------

def series_argument(params: NwsParams, s: float, t: float) -> float:
    """A(s,t) = ε E(s,t), so that F = 1/(1 + A)."""
    if params.epsilon == 0:
        return 0.0
    return float(params.epsilon * erf_ratio(s, t, params))


def locate_series_argument(params: NwsParams, s: float, target: float, t_max: float,
                           t_min: float = 1e-6) -> float:
    """Time at which |A(s,t)| equals target; E grows monotonically in t."""
    if params.n != 2:
        raise ValueError(f"series argument is defined for n = 2, got n = {params.n}")

    def gap(t: float) -> float:
        return abs(series_argument(params, s, t)) - target

    low, high = gap(t_min), gap(t_max)
    if low > 0 or high < 0:
        raise ValueError(f"|A| does not cross {target} for t in [{t_min}, {t_max}] at s={s}")
    return float(optimize.brentq(gap, t_min, t_max, xtol=1e-14, rtol=1e-13))


def neumann_series_check(params: NwsParams, s: float, t: float, order: int) -> ClaimReport:
    """Partial sums Σ_{k≤order} (−A)^k against 1/(1 + A)."""
    if params.n != 2:
        raise ValueError(f"Neumann expansion applies to n = 2, got n = {params.n}")
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    argument = series_argument(params, s, t)
    magnitude = abs(argument)
    converges = magnitude < 1.0
    metadata = {"s": s, "t": t, "order": order, "argument": argument, "converges": converges}
    if argument == -1.0:
        return inconclusive_report("neumann-convergence", NEUMANN_REF,
                                   "argument equals -1; 1/(1+A) is undefined", metadata)
    exact = 1.0 / (1.0 + argument)
    powers = np.power(-argument, np.arange(order + 1))
    partial = np.cumsum(powers)
    errors = np.abs(partial - exact)
    rounding = numerical_floor(order + 1) * max(1.0, float(np.max(np.abs(partial))))
    if converges:
        bound = magnitude ** (order + 1) / (1.0 - magnitude)
        estimate = bound + rounding
    else:
        bound = float("inf")
        estimate = rounding
    decay = float(errors[-1] / errors[-2]) if errors[-2] > 0 else 0.0
    metadata.update(
        partial_sum=float(partial[-1]),
        exact=exact,
        tail_bound=bound if np.isfinite(bound) else None,
        decay_rate=decay,
    )
    if not converges:
        logger.info("series argument |A|=%.6g >= 1 at s=%r, t=%r; expansion diverges", magnitude, s, t)
    return make_report("neumann-convergence", NEUMANN_REF, float(errors[-1]), estimate, metadata)

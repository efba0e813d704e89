"""
Closed-form Green's functions of the damped linear operator u_t - ν u_xx + α u.
The full linear propagator is G e^{-αt} in space and g e^{-αt} in frequency;
the damping factor is kept explicit so g matches the codomain formulas exactly.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field, field_validator

from fields import Field, forward_fourier, inverse_fourier


class KernelDomainError(ValueError):
    """Raised when a kernel is evaluated outside its domain (t <= 0 for the heat kernel)."""


class NwsParams(BaseModel):
    """Constants of u_t - ν u_xx + α u - ε u^n = 0."""

    model_config = ConfigDict(frozen=True)

    nu: float = 1.0
    alpha: float = 1.0
    epsilon: float = 1.0
    n: int = 2

    @field_validator("nu", "alpha")
    @classmethod
    def _positive(cls, value: float, info) -> float:
        if not value > 0:
            raise ValueError(f"{info.field_name} must be positive, got {value}")
        return value

    @field_validator("n")
    @classmethod
    def _power(cls, value: int) -> int:
        if value < 2:
            raise ValueError(f"n must be >= 2, got {value}")
        return value

    @computed_field
    @property
    def gamma(self) -> float:
        """Codomain coefficient; equal to ε under the constant-free convolution theorem."""
        return self.epsilon

    @property
    def equilibrium(self) -> float:
        """Spatially uniform nonzero equilibrium u* = (α/ε)^{1/(n-1)}."""
        if self.epsilon == 0:
            raise ValueError("no nonzero equilibrium when epsilon == 0")
        return (self.alpha / self.epsilon) ** (1.0 / (self.n - 1))

    def replace(self, **changes) -> "NwsParams":
        return self.model_copy(update=changes)


def heat_kernel(x, t: float, params: NwsParams):
    """G(x,t) = exp(-x²/(4νt)) / √(4πνt), undamped."""
    if not t > 0:
        raise KernelDomainError(f"heat kernel needs t > 0, got {t}")
    four_nu_t = 4.0 * params.nu * t
    return np.exp(-np.square(x) / four_nu_t) / np.sqrt(np.pi * four_nu_t)


def spectral_kernel(s, t: float, params: NwsParams):
    """g(s,t) = exp(-4π²νs²t)."""
    if t < 0:
        raise KernelDomainError(f"spectral kernel needs t >= 0, got {t}")
    return np.exp(-4.0 * np.pi ** 2 * params.nu * np.square(s) * t)


def serial_kernel(s, t: float, k: int, params: NwsParams):
    """
    k-fold spectral self-convolution g∗…∗g (k factors) in closed form.

    With c = 4π²νt the result is (π/c)^{(k-1)/2} e^{-c s²/k} / √k.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not t > 0:
        raise KernelDomainError(f"serial kernel needs t > 0, got {t}")
    c = 4.0 * np.pi ** 2 * params.nu * t
    return (np.pi / c) ** (0.5 * (k - 1)) * np.exp(-c * np.square(s) / k) / np.sqrt(k)


def linear_propagator(x, t: float, params: NwsParams):
    """G(x,t) e^{-αt}."""
    return heat_kernel(x, t, params) * np.exp(-params.alpha * t)


def linear_propagate(f0: Field, t: float, params: NwsParams) -> Field:
    """e^{-αt} (f0 ∗ G(·,t)) computed spectrally; solves the ε = 0 equation."""
    if not t > 0:
        raise KernelDomainError(f"linear propagation needs t > 0, got {t}")
    F0 = forward_fourier(f0)
    damped = F0.values * spectral_kernel(F0.s, t, params) * np.exp(-params.alpha * t)
    out = inverse_fourier(F0.with_values(damped))
    return out.with_values(out.values, time_stamp=f0.time_stamp + t)

"""
Convolution engines (direct periodic quadrature and FFT) and the residual
checkers for the exponent and scalar-distribution properties of convolution.
The identities are measured, never assumed.
"""

from typing import Union

import numpy as np

from fields import Field, SpectralField, forward_fourier, require_same_grid
from reports import ClaimReport, inconclusive_report, make_report, numerical_floor

AnyField = Union[Field, SpectralField]

EXPONENT_REF = "Theorem 1: (f∗g)^n = (f∗g^n) = (f^n∗g)"
SCALAR_REF = "Theorem 1: h(f∗G) = (hf∗G) = (f∗hG)"
CHAIN_REF = "Theorem 1 (c1)/(c2): (f∗G)^n ⊂ (Fg∗…∗Fg) = F^n(g∗…∗g)"


def _spacing(f: AnyField) -> float:
    return f.grid.spacing if isinstance(f, Field) else f.sgrid.spacing


def _rebuild(template: AnyField, values: np.ndarray) -> AnyField:
    if isinstance(template, Field):
        return template.with_values(np.real(values))
    return template.with_values(values)


def _periodic_direct(a: np.ndarray, b: np.ndarray, spacing: float) -> np.ndarray:
    n = a.shape[0]
    i = np.arange(n)
    # sample of b at x_i - x_j on the centred grid
    index = (i[:, None] - i[None, :] + n // 2) % n
    return spacing * (b[index] @ a)


def _periodic_fft(a: np.ndarray, b: np.ndarray, spacing: float) -> np.ndarray:
    product = np.fft.fft(np.fft.ifftshift(a)) * np.fft.fft(np.fft.ifftshift(b))
    return spacing * np.fft.fftshift(np.fft.ifft(product))


def convolve_direct(f: AnyField, g: AnyField) -> AnyField:
    """(f∗g)(x_i) = Σ_j f(x_j) g(x_i - x_j) · spacing over the periodic grid; O(N²)."""
    require_same_grid(f, g)
    return _rebuild(f, _periodic_direct(f.values, g.values, _spacing(f)))


def convolve_fft(f: AnyField, g: AnyField) -> AnyField:
    """Same contract as convolve_direct via the discrete convolution theorem."""
    require_same_grid(f, g)
    return _rebuild(f, _periodic_fft(f.values, g.values, _spacing(f)))


ENGINES = {"fft": convolve_fft, "direct": convolve_direct}


def serial_self_convolve(g: AnyField, k: int, method: str = "fft") -> AnyField:
    """g∗g∗…∗g with k factors; k = 1 returns g unchanged."""
    if k < 1:
        raise ValueError(f"serial convolution needs k >= 1, got {k}")
    engine = ENGINES[method]
    result = g
    for _ in range(k - 1):
        result = engine(result, g)
    return result


def power(f: AnyField, n: int) -> AnyField:
    """Elementwise f^n."""
    return _rebuild(f, np.power(f.values, n))


def _sup(values: np.ndarray) -> float:
    return float(np.max(np.abs(values)))


def check_exponent_property(f: Field, g: Field, n: int, method: str = "fft") -> ClaimReport:
    """
    Measure (f∗g)^n against (f∗g^n) and (f^n∗g).

    residual is max(r1, r2) with r1 = ‖(f∗g)^n − (f∗g^n)‖/‖(f∗g)^n‖ and
    r2 the same for (f^n∗g). The error estimate is the disagreement between
    the FFT and direct engines plus a rounding floor.
    """
    if n < 1:
        raise ValueError(f"exponent must be >= 1, got {n}")
    require_same_grid(f, g)
    engine = ENGINES[method]
    other = ENGINES["direct" if method == "fft" else "fft"]

    left = power(engine(f, g), n).values
    middle = engine(f, power(g, n)).values
    right = engine(power(f, n), g).values
    scale = _sup(left)
    metadata = {
        "n": n,
        "n_points": f.grid.n_points,
        "length": f.grid.length,
        "method": method,
        # f∗c = c∫f: only r1 is forced, and only for a unit-mass other factor
        "constant_factor": bool(np.ptp(f.values) == 0.0 or np.ptp(g.values) == 0.0),
    }
    if scale < 1e-300:
        return inconclusive_report(
            "exponent-property", EXPONENT_REF,
            "‖(f∗g)^n‖ vanishes; relative residual undefined", metadata,
        )

    r1 = _sup(left - middle) / scale
    r2 = _sup(left - right) / scale
    cross_left = power(other(f, g), n).values
    cross_middle = other(f, power(g, n)).values
    cross_right = other(power(f, n), g).values
    engine_gap = max(
        _sup(left - cross_left), _sup(middle - cross_middle), _sup(right - cross_right)
    ) / scale
    origin = f.grid.origin_index
    metadata.update(
        r1=r1,
        r2=r2,
        gap_at_origin=float(abs(left[origin] - middle[origin])),
        left_at_origin=float(left[origin]),
        middle_at_origin=float(middle[origin]),
        right_at_origin=float(right[origin]),
    )
    error = engine_gap + numerical_floor(f.grid.n_points)
    return make_report("exponent-property", EXPONENT_REF, max(r1, r2), error, metadata)


def check_scalar_distribution(h: Field, f: Field, g: Field, method: str = "fft") -> ClaimReport:
    """Measure h(f∗g) against (hf∗g) and (f∗hg); constant h is forced to zero residual."""
    require_same_grid(h, f)
    require_same_grid(f, g)
    engine = ENGINES[method]
    left = h.values * engine(f, g).values
    middle = engine(f.with_values(h.values * f.values), g).values
    right = engine(f, g.with_values(h.values * g.values)).values
    scale = max(_sup(left), _sup(middle), _sup(right))
    metadata = {"n_points": f.grid.n_points, "length": f.grid.length, "method": method}
    if scale < 1e-300:
        metadata["note"] = "all three sides vanish"
        return make_report("scalar-distribution", SCALAR_REF, 0.0, 0.0, metadata)
    r1 = _sup(left - middle) / scale
    r2 = _sup(left - right) / scale
    metadata.update(r1=r1, r2=r2)
    return make_report(
        "scalar-distribution", SCALAR_REF, max(r1, r2), numerical_floor(f.grid.n_points), metadata
    )


def check_spectral_chain(f: Field, g: Field, n: int) -> ClaimReport:
    """
    Codomain side of the exponent-property argument.

    chain_residual compares forward((f∗g)^n) with the n-fold spectral
    self-convolution of F·G, which the convolution theorem guarantees up to
    aliasing. The reported residual compares that against F^n·(G∗…∗G), the
    step the argument asserts.
    """
    if n < 1:
        raise ValueError(f"exponent must be >= 1, got {n}")
    require_same_grid(f, g)
    F = forward_fourier(f)
    G = forward_fourier(g)
    transformed = forward_fourier(power(convolve_fft(f, g), n)).values
    chained = serial_self_convolve(F.with_values(F.values * G.values), n).values
    asserted = np.power(F.values, n) * serial_self_convolve(G, n).values
    scale = _sup(transformed)
    metadata = {"n": n, "n_points": f.grid.n_points, "length": f.grid.length}
    if scale < 1e-300:
        return inconclusive_report("spectral-chain", CHAIN_REF, "transform of (f∗g)^n vanishes", metadata)
    chain_residual = _sup(transformed - chained) / scale
    asserted_residual = _sup(chained - asserted) / scale
    metadata.update(chain_residual=chain_residual, asserted_residual=asserted_residual)
    return make_report(
        "spectral-chain", CHAIN_REF, asserted_residual,
        chain_residual + numerical_floor(f.grid.n_points), metadata,
    )

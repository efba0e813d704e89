"""
Grid and field value types shared by the numerical modules.
Uniform periodic 1-D grids, their spectral duals, and the scaled FFT pair
F(s) = ∫ f(x) e^{-2πisx} dx under the ordinary-frequency convention.
"""

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class GridMismatchError(ValueError):
    """Raised when two fields that must share a grid do not."""


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-length/2, length/2)."""

    n_points: int
    length: float

    def __post_init__(self):
        n = int(self.n_points)
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 2, got {self.n_points}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def points(self) -> np.ndarray:
        return -0.5 * self.length + self.spacing * np.arange(self.n_points)

    @property
    def origin_index(self) -> int:
        return self.n_points // 2

    def dual(self) -> "SpectralGrid":
        return SpectralGrid(n_points=self.n_points, length=self.length)


@dataclass(frozen=True)
class SpectralGrid:
    """Frequencies s_k = k/length for k in [-n/2, n/2); dual of exactly one Grid."""

    n_points: int
    length: float

    def __post_init__(self):
        # validation is shared with the spatial grid
        Grid(self.n_points, self.length)
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return 1.0 / self.length

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.n_points // 2, self.n_points // 2) / self.length

    @property
    def origin_index(self) -> int:
        return self.n_points // 2

    @property
    def nyquist(self) -> float:
        return 0.5 * self.n_points / self.length

    def dual(self) -> Grid:
        return Grid(n_points=self.n_points, length=self.length)

    @classmethod
    def covering(cls, half_width: float, resolution: float, minimum: int = 256) -> "SpectralGrid":
        """Smallest power-of-two grid with s-spacing <= resolution spanning ±half_width."""
        n_points = max(minimum, int(2 ** np.ceil(np.log2(2.0 * half_width / resolution))))
        return cls(n_points=n_points, length=1.0 / resolution)


@dataclass(frozen=True)
class Field:
    """Real samples of a function on a Grid at a fixed time."""

    grid: Grid
    values: np.ndarray
    time_stamp: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"Field needs {self.grid.n_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Field values must be finite")
        if self.time_stamp < 0:
            raise ValueError(f"time_stamp must be nonnegative, got {self.time_stamp}")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "time_stamp", float(self.time_stamp))

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> float:
        # periodic trapezoid rule
        return float(np.sum(self.values) * self.grid.spacing)

    def with_values(self, values: np.ndarray, time_stamp: Optional[float] = None) -> "Field":
        return Field(self.grid, values, self.time_stamp if time_stamp is None else time_stamp)

    @classmethod
    def from_function(cls, grid: Grid, func, time_stamp: float = 0.0) -> "Field":
        return cls(grid, func(grid.points), time_stamp)


@dataclass(frozen=True)
class SpectralField:
    """Complex samples on a SpectralGrid at a fixed time."""

    sgrid: SpectralGrid
    values: np.ndarray
    time_stamp: float = 0.0
    hermitian: bool = field(default=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.sgrid.n_points,):
            raise ValueError(
                f"SpectralField needs {self.sgrid.n_points} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("SpectralField values must be finite")
        if self.time_stamp < 0:
            raise ValueError(f"time_stamp must be nonnegative, got {self.time_stamp}")
        if self.hermitian and not is_hermitian(values):
            raise ValueError("SpectralField tagged hermitian but value(-s) != conj(value(s))")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "time_stamp", float(self.time_stamp))

    @property
    def s(self) -> np.ndarray:
        return self.sgrid.frequencies

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> complex:
        return complex(np.sum(self.values) * self.sgrid.spacing)

    def with_values(self, values: np.ndarray, time_stamp: Optional[float] = None) -> "SpectralField":
        return SpectralField(self.sgrid, values, self.time_stamp if time_stamp is None else time_stamp)

    @classmethod
    def from_function(cls, sgrid: SpectralGrid, func, time_stamp: float = 0.0) -> "SpectralField":
        return cls(sgrid, func(sgrid.frequencies), time_stamp)


def is_hermitian(values: np.ndarray, rtol: float = 1e-12) -> bool:
    """value(-s) == conj(value(s)) for every pair; the unpaired Nyquist sample is skipped."""
    values = np.asarray(values, dtype=complex)
    paired = values[1:]
    mirrored = np.conj(paired[::-1])
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    return bool(np.max(np.abs(paired - mirrored)) <= rtol * scale)


def require_same_grid(a, b):
    grid_a = a.grid if isinstance(a, Field) else a.sgrid
    grid_b = b.grid if isinstance(b, Field) else b.sgrid
    if type(a) is not type(b) or grid_a != grid_b:
        raise GridMismatchError(f"grid mismatch: {grid_a} vs {grid_b}")


def discrete_delta(grid: Grid) -> Field:
    """Unit-mass discrete delta: 1/spacing at x=0, zero elsewhere."""
    values = np.zeros(grid.n_points)
    values[grid.origin_index] = 1.0 / grid.spacing
    return Field(grid, values)


def forward_fourier(f: Field) -> SpectralField:
    """F(s_k) = spacing * Σ f(x_j) e^{-2πi s_k x_j}."""
    grid = f.grid
    spectrum = grid.spacing * np.fft.fftshift(np.fft.fft(np.fft.ifftshift(f.values)))
    return SpectralField(grid.dual(), spectrum, f.time_stamp)


def inverse_fourier(F: SpectralField) -> Field:
    """Exact discrete inverse of forward_fourier; the imaginary residue is dropped."""
    grid = F.sgrid.dual()
    samples = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(F.values))) / grid.spacing
    return Field(grid, samples.real, F.time_stamp)


def spectral_derivative(f: Field, order: int = 2) -> Field:
    """d^order f / dx^order by multiplying with (2πis)^order."""
    F = forward_fourier(f)
    factor = (2j * np.pi * F.s) ** order
    if order % 2:
        # odd derivatives of the unpaired Nyquist mode are not real
        factor[0] = 0.0
    return inverse_fourier(F.with_values(F.values * factor))


def field_to_csv(f: Field, path: str) -> str:
    """Columns x, value_re, value_im; the time stamp sits in a leading comment."""
    with open(path, "w", newline="") as handle:
        handle.write(f"# time_stamp={f.time_stamp!r}\n")
        writer = csv.writer(handle)
        writer.writerow(["x", "value_re", "value_im"])
        for x, value in zip(f.x, f.values):
            writer.writerow([repr(float(x)), repr(float(value)), "0.0"])
    return path


def spectral_field_to_csv(F: SpectralField, path: str) -> str:
    with open(path, "w", newline="") as handle:
        handle.write(f"# time_stamp={F.time_stamp!r}\n")
        writer = csv.writer(handle)
        writer.writerow(["s", "value_re", "value_im"])
        for s, value in zip(F.s, F.values):
            writer.writerow([repr(float(s)), repr(float(value.real)), repr(float(value.imag))])
    return path

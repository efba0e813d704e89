"""
Configuration for the NWS convolution laboratory.
Environment defaults are read first; experiment files and command-line
overrides are layered on top by load_experiment_config.
"""

import os
from typing import Dict, List, Mapping, Optional, Tuple

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from fields import Grid
from kernels import NwsParams

# Load environment variables before the defaults below are read
load_dotenv(override=False)

# ===== Equation constants =====
DEFAULT_NU = os.getenv("NWS_NU", "1.0")
DEFAULT_ALPHA = os.getenv("NWS_ALPHA", "1.0")
DEFAULT_EPSILON = os.getenv("NWS_EPSILON", "1.0")
DEFAULT_N = os.getenv("NWS_N", "2")

# ===== Grid and time =====
DEFAULT_N_POINTS = os.getenv("NWS_N_POINTS", "256")
DEFAULT_LENGTH = os.getenv("NWS_LENGTH", "32.0")
DEFAULT_T_END = os.getenv("NWS_T_END", "1.0")
DEFAULT_DT = os.getenv("NWS_DT", "0.01")
DEFAULT_T_SAMPLES = os.getenv("NWS_T_SAMPLES", "0.25,0.5,1.0")

# ===== Execution and outputs =====
DEFAULT_WORKERS = os.getenv("NWS_WORKERS", "4")
DEFAULT_SEED = os.getenv("NWS_SEED", "20240607")
DEFAULT_CSV_DIR = os.getenv("NWS_CSV_DIR", "output")
DEFAULT_REPORT_PATH = os.getenv("NWS_REPORT_PATH", os.path.join("output", "claims.ndjson"))

# flat key -> (section, field)
FLAT_KEYS: Dict[str, Tuple[str, str]] = {
    "nu": ("params", "nu"),
    "alpha": ("params", "alpha"),
    "epsilon": ("params", "epsilon"),
    "n": ("params", "n"),
    "n_points": ("grid", "n_points"),
    "length": ("grid", "length"),
    "t_end": ("time", "t_end"),
    "dt": ("time", "dt"),
    "t_samples": ("time", "t_samples"),
    "record_every": ("time", "record_every"),
    "quadrature_tol": ("tolerances", "quadrature"),
    "fd_step": ("tolerances", "fd_step"),
    "support_factor": ("tolerances", "support_factor"),
    "refute_factor": ("tolerances", "refute_factor"),
    "csv_dir": ("outputs", "csv_dir"),
    "report_path": ("outputs", "report_path"),
    "seed": ("run", "seed"),
    "workers": ("run", "workers"),
    "initial_kind": ("initial", "kind"),
    "initial_amplitude": ("initial", "amplitude"),
    "initial_width": ("initial", "width"),
    "s_lattice": ("lattice", "s_points"),
    "t_lattice": ("lattice", "t_points"),
    "t_min": ("lattice", "t_min"),
    "t_max": ("lattice", "t_max"),
    "neumann_order": ("neumann", "order"),
    "neumann_s": ("neumann", "s"),
}

INITIAL_KINDS = ("gaussian", "zero", "uniform")


class ConfigError(ValueError):
    """Invalid experiment configuration; raised before any claim runs."""


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class GridSettings(_Section):
    n_points: int = 256
    length: float = 32.0

    @model_validator(mode="after")
    def _valid_grid(self):
        Grid(self.n_points, self.length)
        return self


class TimeSettings(_Section):
    t_end: float = 1.0
    dt: float = 0.01
    t_samples: Tuple[float, ...] = (0.25, 0.5, 1.0)
    record_every: int = 10

    @field_validator("t_samples", mode="before")
    @classmethod
    def _split(cls, value):
        if isinstance(value, str):
            return tuple(float(item) for item in value.split(",") if item.strip())
        return value

    @model_validator(mode="after")
    def _valid_times(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0 or self.dt > self.t_end:
            raise ValueError(f"need 0 < dt <= t_end, got dt={self.dt}, t_end={self.t_end}")
        if not self.t_samples or min(self.t_samples) <= 0:
            raise ValueError("t_samples must be a nonempty list of positive times")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        return self


class Tolerances(_Section):
    quadrature: float = 1e-13
    fd_step: float = 1e-5
    support_factor: float = 10.0
    refute_factor: float = 100.0

    @model_validator(mode="after")
    def _valid_tolerances(self):
        for name in ("quadrature", "fd_step", "support_factor", "refute_factor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.support_factor < self.refute_factor:
            raise ValueError("support_factor must be smaller than refute_factor")
        return self


class OutputSettings(_Section):
    csv_dir: str = "output"
    report_path: str = os.path.join("output", "claims.ndjson")


class RunSettings(_Section):
    seed: int = 20240607
    workers: int = 4

    @field_validator("workers")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"workers must be >= 1, got {value}")
        return value


class InitialCondition(_Section):
    """gaussian: amplitude·e^{-x²/width²}; uniform: amplitude·u*; zero."""

    kind: str = "gaussian"
    amplitude: float = 0.1
    width: float = 1.0

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, value: str) -> str:
        if value not in INITIAL_KINDS:
            raise ValueError(f"initial_kind must be one of {INITIAL_KINDS}, got {value!r}")
        return value

    @field_validator("width")
    @classmethod
    def _positive_width(cls, value: float) -> float:
        if not value > 0:
            raise ValueError(f"initial_width must be positive, got {value}")
        return value


class LatticeSettings(_Section):
    s_points: int = 21
    t_points: int = 11
    t_min: float = 0.05
    t_max: float = 2.0

    @model_validator(mode="after")
    def _valid_lattice(self):
        if self.s_points < 2 or self.t_points < 2:
            raise ValueError("lattices need at least two points per axis")
        if not 0 < self.t_min < self.t_max:
            raise ValueError(f"need 0 < t_min < t_max, got {self.t_min}, {self.t_max}")
        return self


class NeumannSettings(_Section):
    order: int = 20
    s: float = 0.5

    @field_validator("order")
    @classmethod
    def _positive_order(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"neumann_order must be >= 1, got {value}")
        return value


class ExperimentConfig(_Section):
    """Everything one suite run depends on; equal configs give byte-identical reports."""

    params: NwsParams = NwsParams()
    grid: GridSettings = GridSettings()
    time: TimeSettings = TimeSettings()
    tolerances: Tolerances = Tolerances()
    outputs: OutputSettings = OutputSettings()
    run: RunSettings = RunSettings()
    initial: InitialCondition = InitialCondition()
    lattice: LatticeSettings = LatticeSettings()
    neumann: NeumannSettings = NeumannSettings()

    def make_grid(self) -> Grid:
        return Grid(self.grid.n_points, self.grid.length)

    def to_flat(self) -> Dict[str, object]:
        flat = {}
        for key, (section, name) in FLAT_KEYS.items():
            value = getattr(getattr(self, section), name)
            flat[key] = ",".join(repr(v) for v in value) if isinstance(value, tuple) else value
        return flat

    def with_overrides(self, overrides: Mapping[str, str]) -> "ExperimentConfig":
        flat = {key: str(value) for key, value in self.to_flat().items()}
        flat.update(_check_keys(overrides, "override"))
        return config_from_flat(flat)


def environment_defaults() -> Dict[str, str]:
    return {
        "nu": DEFAULT_NU,
        "alpha": DEFAULT_ALPHA,
        "epsilon": DEFAULT_EPSILON,
        "n": DEFAULT_N,
        "n_points": DEFAULT_N_POINTS,
        "length": DEFAULT_LENGTH,
        "t_end": DEFAULT_T_END,
        "dt": DEFAULT_DT,
        "t_samples": DEFAULT_T_SAMPLES,
        "workers": DEFAULT_WORKERS,
        "seed": DEFAULT_SEED,
        "csv_dir": DEFAULT_CSV_DIR,
        "report_path": DEFAULT_REPORT_PATH,
    }


def _check_keys(
    values: Mapping[str, Optional[str]], origin: str, echo: bool = True
) -> Dict[str, str]:
    """Reject unknown or empty keys; file keys are counted, never echoed."""
    unknown = sorted(set(values) - set(FLAT_KEYS))
    if unknown:
        if not echo:
            raise ConfigError(f"{origin} has {len(unknown)} unrecognised line(s)")
        raise ConfigError(f"unknown {origin} key(s): {', '.join(unknown)}")
    missing = sorted(key for key, value in values.items() if value is None)
    if missing:
        raise ConfigError(f"{origin} key(s) without a value: {', '.join(missing)}")
    return {key: str(value).strip() for key, value in values.items()}


def config_from_flat(flat: Mapping[str, str]) -> ExperimentConfig:
    """Build a validated ExperimentConfig from flat key=value strings."""
    sections: Dict[str, Dict[str, str]] = {}
    for key, value in _check_keys(flat, "config").items():
        section, name = FLAT_KEYS[key]
        sections.setdefault(section, {})[name] = value
    try:
        return ExperimentConfig(**sections)
    except ValidationError as exc:
        raise ConfigError(f"invalid experiment configuration: {exc}") from exc


def parse_overrides(items: Optional[List[str]]) -> Dict[str, str]:
    """['key=value', ...] from repeated --param flags."""
    overrides = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--param expects key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def load_experiment_config(
    path: Optional[str] = None,
    overrides: Optional[Mapping[str, str]] = None,
    out_dir: Optional[str] = None,
) -> ExperimentConfig:
    """
    Layer environment defaults, an optional key=value file, --param
    overrides and --out, in that order of precedence.

    Args:
        path: Experiment file in dotenv syntax (# comments allowed)
        overrides: Flat key/value pairs from the command line
        out_dir: Output directory rewriting csv_dir and the report directory

    Returns:
        ExperimentConfig: the validated configuration
    """
    flat = environment_defaults()
    if path:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        flat.update(_check_keys(dotenv_values(path), f"config file {path}", echo=False))
    if overrides:
        flat.update(_check_keys(overrides, "override"))
    if out_dir:
        flat["csv_dir"] = out_dir
        flat["report_path"] = os.path.join(out_dir, os.path.basename(flat["report_path"]))
    return config_from_flat(flat)

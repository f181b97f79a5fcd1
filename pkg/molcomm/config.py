"""Run configuration for parameter sweeps.

A sweep is configured by a JSON file plus command-line overrides. Defaults
reproduce the reference numerical setup: 4-ary schemes, 125 molecules per
bit, r = 20 um, T_s = 20 us, tau = 2 us, z = 20, D swept from 1 to 25 m^2/s.
"""

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .analysis import gaussian_validity_warnings, operating_point
from .errors import ConfigError, MolcommError
from .modulation import SCHEMES, Scheme, SchemeConfig, build_config
from .montecarlo import COUNT_PATHS
from .physics import (
    ChannelGeometry,
    FluidEnvironment,
    SizeRegime,
    diffusion_coefficient,
    slot_hit_probability,
)
from .stats import ArrivalMode

ENV_OUTPUT_DIR = "MOLCOMM_OUTPUT_DIR"
DEFAULT_OUTPUT_NAME = "sweep.csv"

SWEEP_PARAMETERS = ("D", "r", "z", "n")
SWEEP_SPACINGS = ("linear", "log")
MAX_BITS_PER_SYMBOL = 6

INTEGER = "an integer"
NUMBER = "a number"
TEXT = "a string"

RUN_FIELD_KINDS = {
    "k": INTEGER,
    "molecules_per_bit": INTEGER,
    "z": INTEGER,
    "background": INTEGER,
    "trials": INTEGER,
    "seed": INTEGER,
    "workers": INTEGER,
    "r": NUMBER,
    "T_s": NUMBER,
    "tau": NUMBER,
    "diffusion_coefficient": NUMBER,
    "mode": TEXT,
    "path": TEXT,
    "output": TEXT,
}
SWEEP_FIELD_KINDS = {
    "parameter": TEXT,
    "start": NUMBER,
    "stop": NUMBER,
    "steps": INTEGER,
    "spacing": TEXT,
}
FLUID_FIELD_KINDS = {
    "temperature": NUMBER,
    "viscosity": NUMBER,
    "stokes_radius": NUMBER,
    "size_regime": TEXT,
}
NULLABLE_FIELDS = frozenset({"diffusion_coefficient", "output"})
# JSON key names of renamed sweep fields
SWEEP_KEYS = {"start": "from", "stop": "to"}


@dataclass
class Diagnostic:
    """One validation finding."""

    severity: str  # "error" or "warning"
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def __str__(self) -> str:
        return f"{self.severity}: {self.message}"


@dataclass
class SweepSpec:
    """Swept parameter and its grid."""

    parameter: str = "D"
    start: float = 1.0
    stop: float = 25.0
    steps: int = 25
    spacing: str = "linear"

    def values(self) -> list[float]:
        """Grid values in sweep order; z and n are rounded to integers."""
        if self.spacing == "log":
            grid = np.geomspace(self.start, self.stop, self.steps)
        else:
            grid = np.linspace(self.start, self.stop, self.steps)
        if self.parameter in ("z", "n"):
            return [float(math.floor(v + 0.5)) for v in grid]
        return [float(v) for v in grid]


@dataclass
class FluidSettings:
    """Fluid block used when no explicit diffusion coefficient is given."""

    temperature: float = 310.0
    viscosity: float = 1.0e-3
    stokes_radius: float = 1.0e-9
    size_regime: str = "comparable"

    def environment(self) -> FluidEnvironment:
        """FluidEnvironment for these settings."""
        try:
            regime = SizeRegime(self.size_regime)
        except ValueError:
            raise ConfigError(f"unknown size_regime: {self.size_regime}") from None
        return FluidEnvironment(
            temperature=self.temperature,
            viscosity=self.viscosity,
            stokes_radius=self.stokes_radius,
            size_regime=regime,
        )


@dataclass
class RunConfig:
    """Complete configuration of one sweep run."""

    schemes: list[str] = field(default_factory=lambda: [s.value for s in SCHEMES])
    k: int = 2
    molecules_per_bit: int = 125
    r: float = 20e-6
    T_s: float = 20e-6
    tau: float = 2e-6
    z: int = 20
    diffusion_coefficient: float | None = 13.0
    fluid: FluidSettings | None = None
    lane_diffusion_scale: list[float] | None = None
    background: int = 0
    sweep: SweepSpec = field(default_factory=SweepSpec)
    trials: int = 10_000
    seed: int = 0
    mode: str = "gaussian"
    path: str = "binomial"
    workers: int = 1
    output: str | None = None

    @property
    def arrival_mode(self) -> ArrivalMode:
        """Parsed tail evaluation mode."""
        return ArrivalMode.parse(self.mode)

    @property
    def scheme_list(self) -> list[Scheme]:
        """Parsed schemes in registry order."""
        chosen = {Scheme.parse(s) for s in self.schemes}
        return [s for s in SCHEMES if s in chosen]

    def to_dict(self) -> dict[str, Any]:
        """JSON-compatible dictionary using the file's key names."""
        data = dataclasses.asdict(self)
        sweep = data.pop("sweep")
        data["sweep"] = {
            "parameter": sweep["parameter"],
            "from": sweep["start"],
            "to": sweep["stop"],
            "steps": sweep["steps"],
            "spacing": sweep["spacing"],
        }
        return data


def _is_integer(value: Any) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)


def _matches(value: Any, kind: str) -> bool:
    if kind == INTEGER:
        return _is_integer(value)
    if kind == NUMBER:
        return _is_number(value)
    return isinstance(value, str)


def _field_type_errors(
    prefix: str, obj: Any, kinds: dict[str, str], labels: dict[str, str] | None = None
) -> list[str]:
    labels = labels or {}
    errors = []
    for name, kind in kinds.items():
        value = getattr(obj, name)
        if value is None and name in NULLABLE_FIELDS:
            continue
        if not _matches(value, kind):
            errors.append(f"{prefix}{labels.get(name, name)} must be {kind}, got {value!r}")
    return errors


def type_errors(config: RunConfig) -> list[str]:
    """Fields whose values have the wrong type; range checks assume none."""
    errors = _field_type_errors("", config, RUN_FIELD_KINDS)
    schemes = config.schemes
    if not isinstance(schemes, (list, tuple)) or not all(isinstance(s, str) for s in schemes):
        errors.append(f"schemes must be a list of strings, got {schemes!r}")
    scale = config.lane_diffusion_scale
    if scale is not None and (
        not isinstance(scale, (list, tuple)) or not all(_is_number(s) for s in scale)
    ):
        errors.append(f"lane_diffusion_scale must be a list of numbers, got {scale!r}")
    if isinstance(config.sweep, SweepSpec):
        errors += _field_type_errors("sweep.", config.sweep, SWEEP_FIELD_KINDS, SWEEP_KEYS)
    else:
        errors.append(f"sweep must be an object, got {config.sweep!r}")
    if isinstance(config.fluid, FluidSettings):
        errors += _field_type_errors("fluid.", config.fluid, FLUID_FIELD_KINDS)
    elif config.fluid is not None:
        errors.append(f"fluid must be an object, got {config.fluid!r}")
    return errors


def _build(cls, label: str, data: Any, rename: dict[str, str] | None = None):
    if not isinstance(data, dict):
        raise ConfigError(f"{label} must be a JSON object, got {data!r}")
    rename = rename or {}
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        name = rename.get(key, key)
        if name not in names:
            raise ConfigError(f"unknown {cls.__name__} key: {key}")
        kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(data: dict[str, Any]) -> RunConfig:
    """Build a RunConfig from a parsed JSON document.

    Raises:
        ConfigError: On unknown keys or malformed blocks.
    """
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a JSON object, got {data!r}")
    data = dict(data)
    if "sweep" in data:
        data["sweep"] = _build(SweepSpec, "sweep", data["sweep"], {"from": "start", "to": "stop"})
    if data.get("fluid") is not None:
        data["fluid"] = _build(FluidSettings, "fluid", data["fluid"])
    if isinstance(data.get("schemes"), str):
        data["schemes"] = [s for s in data["schemes"].split(",") if s]
    config = _build(RunConfig, "config", data)
    errors = type_errors(config)
    if errors:
        raise ConfigError("; ".join(errors), [Diagnostic("error", e) for e in errors])
    return config


def load_config(path: Path) -> RunConfig:
    """Load a run configuration from a JSON file.

    Args:
        path: Path to the JSON config.

    Returns:
        Parsed RunConfig (not yet validated).

    Raises:
        ConfigError: If the file cannot be read or parsed.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot load config {path}: {e}") from e
    return config_from_dict(data)


def apply_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """Return a copy with non-None overrides applied; sweep.* keys patch the sweep."""
    sweep_fields = {
        key.removeprefix("sweep_"): value
        for key, value in overrides.items()
        if key.startswith("sweep_") and value is not None
    }
    top = {k: v for k, v in overrides.items() if not k.startswith("sweep_") and v is not None}
    sweep = dataclasses.replace(config.sweep, **sweep_fields)
    return dataclasses.replace(config, sweep=sweep, **top)


def resolve_output_path(output: str | None) -> Path:
    """Output CSV path; relative paths and the default live in MOLCOMM_OUTPUT_DIR."""
    base = os.environ.get(ENV_OUTPUT_DIR)
    path = Path(output) if output else Path(DEFAULT_OUTPUT_NAME)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def lane_count(scheme: Scheme, k: int) -> int:
    """Number of molecule types a scheme uses."""
    return {Scheme.OOMOSK: k, Scheme.MOSK: 2**k, Scheme.CSK: 1}[scheme]


def base_diffusion_coefficient(config: RunConfig) -> float:
    """D when not swept: the explicit value, else Stokes-Einstein from the fluid block."""
    if config.diffusion_coefficient is not None:
        return float(config.diffusion_coefficient)
    if config.fluid is None:
        raise ConfigError("either diffusion_coefficient or fluid must be given")
    return diffusion_coefficient(config.fluid.environment())


def point_inputs(
    config: RunConfig, scheme: Scheme, value: float
) -> tuple[SchemeConfig, ChannelGeometry]:
    """Scheme configuration and geometry at one sweep value.

    Args:
        config: Run configuration.
        scheme: Scheme to configure.
        value: Value of the swept parameter.

    Returns:
        (SchemeConfig, ChannelGeometry); CSK cuts follow this point's p.
    """
    parameter = config.sweep.parameter
    D = float(value) if parameter == "D" else base_diffusion_coefficient(config)
    r = float(value) if parameter == "r" else config.r
    z = int(value) if parameter == "z" else config.z
    n = int(value) if parameter == "n" else config.molecules_per_bit

    geom = ChannelGeometry(distance=r, slot_duration=config.T_s, transmit_offset=config.tau)
    lanes = lane_count(scheme, config.k)
    scale = config.lane_diffusion_scale or [1.0] * lanes
    coefficients = [D * s for s in scale[:lanes]]
    p = slot_hit_probability(geom, coefficients[0])
    cfg = build_config(scheme, config.k, n, coefficients, z, hit_probability=p)
    return cfg, geom


def validate(config: RunConfig) -> list[Diagnostic]:
    """Check a run configuration.

    Args:
        config: Configuration to check.

    Returns:
        Ordered diagnostics; errors first, then Gaussian-validity warnings
        evaluated at every sweep point. Empty when all is well.
    """
    type_problems = type_errors(config)
    if type_problems:
        return [Diagnostic("error", message) for message in type_problems]
    errors: list[str] = []

    schemes: list[Scheme] = []
    if not config.schemes:
        errors.append("at least one scheme must be selected")
    for name in config.schemes:
        try:
            schemes.append(Scheme.parse(name))
        except ConfigError as e:
            errors.append(str(e))
    if not 1 <= config.k <= MAX_BITS_PER_SYMBOL:
        errors.append(f"k must be between 1 and {MAX_BITS_PER_SYMBOL}")
    if config.molecules_per_bit < 1:
        errors.append("molecules_per_bit must be positive")
    if not config.r > 0:
        errors.append("distance must be positive")
    if not config.T_s > 0:
        errors.append("slot_duration must be positive")
    if not config.tau >= 0:
        errors.append("transmit_offset must be nonnegative")
    if config.z < 1:
        errors.append("threshold z must be positive")
    if config.background < 0:
        errors.append("background must be nonnegative")
    if config.diffusion_coefficient is not None and not config.diffusion_coefficient > 0:
        errors.append("diffusion_coefficient must be positive")
    if config.diffusion_coefficient is None:
        if config.fluid is None:
            errors.append("either diffusion_coefficient or fluid must be given")
        else:
            try:
                config.fluid.environment()
            except MolcommError as e:
                errors.append(str(e))
    if config.lane_diffusion_scale is not None:
        if any(not s > 0 for s in config.lane_diffusion_scale):
            errors.append("lane_diffusion_scale entries must be positive")
        needed = max((lane_count(s, config.k) for s in schemes), default=0)
        if len(config.lane_diffusion_scale) < needed:
            errors.append(f"lane_diffusion_scale needs at least {needed} entries")

    sweep = config.sweep
    if sweep.parameter not in SWEEP_PARAMETERS:
        errors.append(f"sweep parameter must be one of {', '.join(SWEEP_PARAMETERS)}")
    if sweep.spacing not in SWEEP_SPACINGS:
        errors.append(f"sweep spacing must be one of {', '.join(SWEEP_SPACINGS)}")
    if not sweep.start < sweep.stop:
        errors.append("sweep 'from' must be less than 'to'")
    if sweep.steps < 2:
        errors.append("sweep steps must be at least 2")
    if sweep.parameter in SWEEP_PARAMETERS and not sweep.start > 0:
        errors.append(f"sweep of {sweep.parameter} must start above 0")
    if sweep.parameter in ("z", "n") and sweep.start < 1:
        errors.append(f"sweep of {sweep.parameter} must start at 1 or more")

    if config.trials < 0:
        errors.append("trials must be nonnegative")
    if not 0 <= config.seed < 2**64:
        errors.append("seed must be a 64-bit unsigned integer")
    try:
        ArrivalMode.parse(config.mode)
    except ValueError as e:
        errors.append(str(e))
    if config.path not in COUNT_PATHS:
        errors.append(f"path must be one of {', '.join(COUNT_PATHS)}")
    if config.workers < 1:
        errors.append("workers must be at least 1")

    diagnostics = [Diagnostic("error", message) for message in errors]
    if diagnostics or config.arrival_mode is not ArrivalMode.GAUSSIAN_APPROX:
        return diagnostics

    seen: set[str] = set()
    values = sweep.values()
    for scheme in config.scheme_list:
        for value in values:
            cfg, geom = point_inputs(config, scheme, value)
            for message in gaussian_validity_warnings(
                operating_point(cfg, geom, config.background), cfg
            ):
                text = point_warning(message, sweep.parameter, value)
                if text not in seen:
                    seen.add(text)
                    diagnostics.append(Diagnostic("warning", text))
    return diagnostics


def point_warning(message: str, parameter: str, value: float) -> str:
    """A per-point warning tagged with its sweep value."""
    return f"{message} at {parameter}={value:g}"

"""Diffusion-based molecular communication link simulator.

Modules:
- physics: first-hitting-time density, CDF and slot hit probability
- stats: binomial arrival counts, exact and Gaussian tails
- modulation: OOMoSK, MoSK and CSK encoders/decoders
- analysis: transition matrices, SER, mutual information, capacity
- montecarlo: particle-level oracle for the closed forms
- config, sweep, export: parameter sweeps to CSV
"""

__version__ = "1.0.0"

from .analysis import (
    CapacityResult,
    LinkAnalysis,
    LinkOperatingPoint,
    PriorDistribution,
    TransitionMatrix,
    analyze_link,
    capacity,
    mutual_information,
    operating_point,
    symbol_error_rate,
    transition_matrix,
)
from .config import RunConfig, load_config, validate
from .errors import ConfigError, ConvergenceError, MolcommError
from .modulation import Scheme, SchemeConfig, build_config, get_modem
from .montecarlo import RngSpec, TrialReport, empirical_ser
from .physics import (
    ChannelGeometry,
    FluidEnvironment,
    diffusion_coefficient,
    first_hit_cdf,
    first_hit_pdf,
    slot_hit_probability,
)
from .stats import ArrivalMode, ArrivalModel, tail_geq
from .sweep import SweepResult, SweepRow, run_sweep

__all__ = [
    "__version__",
    "ArrivalMode",
    "ArrivalModel",
    "CapacityResult",
    "ChannelGeometry",
    "ConfigError",
    "ConvergenceError",
    "FluidEnvironment",
    "LinkAnalysis",
    "LinkOperatingPoint",
    "MolcommError",
    "PriorDistribution",
    "RngSpec",
    "RunConfig",
    "Scheme",
    "SchemeConfig",
    "SweepResult",
    "SweepRow",
    "TransitionMatrix",
    "TrialReport",
    "analyze_link",
    "build_config",
    "capacity",
    "diffusion_coefficient",
    "empirical_ser",
    "first_hit_cdf",
    "first_hit_pdf",
    "get_modem",
    "load_config",
    "mutual_information",
    "operating_point",
    "run_sweep",
    "slot_hit_probability",
    "symbol_error_rate",
    "tail_geq",
    "transition_matrix",
    "validate",
]

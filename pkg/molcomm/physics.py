"""Diffusion physics for a free-diffusion molecular link.

Computes the diffusion coefficient of a messenger molecule from its fluid
environment and the first-passage statistics of a molecule released at
distance r from the receiver. All functions are pure and thread-safe.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import erfc

from .errors import DomainError, InvalidEnvironmentError

BOLTZMANN_CONSTANT = 1.380649e-23  # J/K

# erfc(38) is below the smallest subnormal double; report an exact zero
ERFC_CUTOFF = 38.0


class SizeRegime(Enum):
    """Messenger molecule size relative to the fluid molecules."""

    COMPARABLE = "comparable"  # S_m ~ S_f, drag 4*eta*zeta
    MUCH_LARGER = "much_larger"  # S_m >> S_f, drag 6*eta*zeta


DRAG_FACTORS = {
    SizeRegime.COMPARABLE: 4.0,
    SizeRegime.MUCH_LARGER: 6.0,
}


@dataclass(frozen=True)
class FluidEnvironment:
    """Fluid medium and messenger molecule properties.

    Attributes:
        temperature: Absolute temperature in kelvin.
        viscosity: Dynamic viscosity of the fluid in pascal-seconds.
        stokes_radius: Stokes' radius of the messenger molecule in meters.
        size_regime: Relative size of messenger and fluid molecules.
        explicit_diffusion_coefficient: Optional D in m^2/s that overrides
            the Stokes-Einstein value.
        boltzmann_constant: k_B in J/K.
    """

    temperature: float = 310.0
    viscosity: float = 1.0e-3
    stokes_radius: float = 1.0e-9
    size_regime: SizeRegime = SizeRegime.COMPARABLE
    explicit_diffusion_coefficient: float | None = None
    boltzmann_constant: float = BOLTZMANN_CONSTANT

    def __post_init__(self) -> None:
        for name in ("temperature", "viscosity", "stokes_radius"):
            value = getattr(self, name)
            if not value > 0:
                raise InvalidEnvironmentError(f"{name} must be positive, got {value}")
        override = self.explicit_diffusion_coefficient
        if override is not None and not override > 0:
            raise InvalidEnvironmentError(
                f"explicit_diffusion_coefficient must be positive, got {override}"
            )
        if not isinstance(self.size_regime, SizeRegime):
            raise InvalidEnvironmentError(f"unknown size regime: {self.size_regime!r}")

    @property
    def drag_constant(self) -> float:
        """Drag constant b of the messenger molecule in the fluid."""
        return DRAG_FACTORS[self.size_regime] * self.viscosity * self.stokes_radius


@dataclass(frozen=True)
class ChannelGeometry:
    """Transmitter-receiver geometry and slot timing.

    Attributes:
        distance: Transmitter-receiver separation r in meters.
        slot_duration: Slot length T_s in seconds.
        transmit_offset: Start of the detection window, measured from the
            release instant of the slot's emission, in seconds.
        slot_index: Position of the slot within a frame.
    """

    distance: float = 20e-6
    slot_duration: float = 20e-6
    transmit_offset: float = 2e-6
    slot_index: int = 0

    def __post_init__(self) -> None:
        if not self.distance > 0:
            raise InvalidEnvironmentError(f"distance must be positive, got {self.distance}")
        if not self.slot_duration > 0:
            raise InvalidEnvironmentError(
                f"slot_duration must be positive, got {self.slot_duration}"
            )
        if not self.transmit_offset >= 0:
            raise InvalidEnvironmentError(
                f"transmit_offset must be nonnegative, got {self.transmit_offset}"
            )
        if self.slot_index < 0:
            raise InvalidEnvironmentError(f"slot_index must be nonnegative, got {self.slot_index}")

    @property
    def window(self) -> tuple[float, float]:
        """Detection window (start, end) relative to the release instant."""
        return self.transmit_offset, self.transmit_offset + self.slot_duration

    @property
    def absolute_window(self) -> tuple[float, float]:
        """Detection window in frame time for a release at slot_index * T_s."""
        release = self.slot_index * self.slot_duration
        start, end = self.window
        return release + start, release + end


def diffusion_coefficient(env: FluidEnvironment) -> float:
    """Compute the diffusion coefficient D = k_B T / b.

    Args:
        env: Fluid environment; its explicit override wins when set.

    Returns:
        Diffusion coefficient in m^2/s.
    """
    if env.explicit_diffusion_coefficient is not None:
        return float(env.explicit_diffusion_coefficient)
    return env.boltzmann_constant * env.temperature / env.drag_constant


def _check_domain(r: float, D: float, t) -> np.ndarray:
    if not r > 0:
        raise DomainError(f"distance must be positive, got {r}")
    if not D > 0:
        raise DomainError(f"diffusion coefficient must be positive, got {D}")
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0) or np.any(np.isnan(t_arr)):
        raise DomainError("time must be nonnegative")
    return t_arr


def _as_output(values: np.ndarray, like) -> float | np.ndarray:
    if np.ndim(like) == 0:
        return float(values)
    return values


def first_hit_pdf(r: float, D: float, t):
    """First hitting time density f(t) of a 1D Brownian molecule.

    Args:
        r: Distance to the receiver in meters.
        D: Diffusion coefficient in m^2/s.
        t: Time(s) in seconds, scalar or array.

    Returns:
        Density in 1/s; zero at t = 0.

    Raises:
        DomainError: If r or D is not positive, or t is negative.
    """
    t_arr = _check_domain(r, D, t)
    out = np.zeros_like(t_arr)
    positive = t_arr > 0
    tp = t_arr[positive]
    # log space keeps tiny t from producing inf * 0
    log_f = (
        np.log(r)
        - 0.5 * np.log(4.0 * np.pi * D)
        - 1.5 * np.log(tp)
        - r * r / (4.0 * D * tp)
    )
    out[positive] = np.exp(log_f)
    return _as_output(out, t)


def first_hit_cdf(r: float, D: float, t):
    """Probability that the first hit happens no later than t.

    Closed form erfc(r / sqrt(4 D t)); exactly zero at t = 0 and wherever the
    erfc argument exceeds ERFC_CUTOFF.

    Args:
        r: Distance to the receiver in meters.
        D: Diffusion coefficient in m^2/s.
        t: Time(s) in seconds, scalar or array.

    Returns:
        Probability in [0, 1].

    Raises:
        DomainError: If r or D is not positive, or t is negative.
    """
    t_arr = _check_domain(r, D, t)
    out = np.zeros_like(t_arr)
    positive = t_arr > 0
    x = r / np.sqrt(4.0 * D * t_arr[positive])
    out[positive] = np.where(x > ERFC_CUTOFF, 0.0, erfc(np.minimum(x, ERFC_CUTOFF)))
    return _as_output(out, t)


def window_hit_probability(r: float, D: float, start: float, duration: float) -> float:
    """Probability that the first hit falls in (start, start + duration).

    Args:
        r: Distance to the receiver in meters.
        D: Diffusion coefficient in m^2/s.
        start: Window start after release, in seconds.
        duration: Window length in seconds; zero gives zero.

    Returns:
        Probability in [0, 1].
    """
    if duration < 0:
        raise DomainError(f"window duration must be nonnegative, got {duration}")
    if duration == 0:
        _check_domain(r, D, start)
        return 0.0
    p = first_hit_cdf(r, D, start + duration) - first_hit_cdf(r, D, start)
    return min(max(p, 0.0), 1.0)


def slot_hit_probability(geom: ChannelGeometry, D: float) -> float:
    """Probability p that a molecule released at slot start is received in the slot.

    Args:
        geom: Channel geometry; the window is (tau, tau + T_s) after release.
        D: Diffusion coefficient in m^2/s.

    Returns:
        Slot hit probability in [0, 1].
    """
    return window_hit_probability(geom.distance, D, geom.transmit_offset, geom.slot_duration)

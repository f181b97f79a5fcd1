"""Arrival-count distributions and tail probabilities.

The number of molecules received in a slot is Binomial(n, p). Detection and
SER analysis need P(N >= z), computed either exactly in log space or with the
Gaussian approximation N(np, np(1-p)).
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import erfc, gammaln, logsumexp

from .errors import DegenerateVarianceError, DomainError

logger = logging.getLogger(__name__)

# below this variance the Gaussian tail is not trusted
GAUSSIAN_MIN_VARIANCE = 9.0


class ArrivalMode(Enum):
    """How arrival-count tails are evaluated."""

    EXACT_BINOMIAL = "exact"
    GAUSSIAN_APPROX = "gaussian"

    @classmethod
    def parse(cls, value: "str | ArrivalMode") -> "ArrivalMode":
        """Parse a mode name such as 'gaussian', 'exact' or 'exact-binomial'."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("exact", "exact-binomial", "exact_binomial", "binomial"):
            return cls.EXACT_BINOMIAL
        if key in ("gaussian", "gauss", "normal"):
            return cls.GAUSSIAN_APPROX
        raise ValueError(f"Unknown arrival mode: {value}. Available: gaussian, exact")


@dataclass(frozen=True)
class ArrivalModel:
    """Binomial arrival count of one molecule type in one slot.

    Attributes:
        released_count: Molecules released, n.
        hit_probability: Per-molecule slot hit probability, p.
        mode: Exact binomial or Gaussian approximation.
    """

    released_count: int
    hit_probability: float
    mode: ArrivalMode = ArrivalMode.GAUSSIAN_APPROX

    def __post_init__(self) -> None:
        if self.released_count < 0:
            raise DomainError(f"released_count must be nonnegative, got {self.released_count}")
        if not 0.0 <= self.hit_probability <= 1.0:
            raise DomainError(f"hit_probability must be in [0, 1], got {self.hit_probability}")


def q_function(x):
    """Standard normal upper tail Q(x) = P(Z >= x).

    Args:
        x: Finite real, scalar or array.

    Returns:
        Tail probability; underflows to exactly 0 for large x.
    """
    values = 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))
    if np.ndim(x) == 0:
        return float(values)
    return values


def gaussian_params(model: ArrivalModel) -> tuple[float, float]:
    """Mean and variance (np, np(1-p)) of the arrival count."""
    n = model.released_count
    p = model.hit_probability
    return n * p, n * p * (1.0 - p)


def gaussian_reliable(model: ArrivalModel) -> bool:
    """Whether the Gaussian approximation is trusted for this model."""
    return gaussian_params(model)[1] >= GAUSSIAN_MIN_VARIANCE


def binomial_log_pmf(k, n: int, p: float):
    """Log of the binomial pmf, with coefficients from log-gamma.

    Args:
        k: Count(s), scalar or array of integers.
        n: Number of trials.
        p: Success probability.

    Returns:
        log P(N = k); -inf outside the support.
    """
    k_arr = np.asarray(k, dtype=np.float64)
    out = np.full(k_arr.shape, -np.inf)
    inside = (k_arr >= 0) & (k_arr <= n)
    if p <= 0.0:
        out[inside & (k_arr == 0)] = 0.0
    elif p >= 1.0:
        out[inside & (k_arr == n)] = 0.0
    else:
        ki = k_arr[inside]
        out[inside] = (
            gammaln(n + 1.0)
            - gammaln(ki + 1.0)
            - gammaln(n - ki + 1.0)
            + ki * math.log(p)
            + (n - ki) * math.log1p(-p)
        )
    if np.ndim(k) == 0:
        return float(out)
    return out


def binomial_pmf(k, n: int, p: float):
    """Binomial pmf P(N = k)."""
    return np.exp(binomial_log_pmf(k, n, p))


def _exact_tail(n: int, p: float, z: int) -> float:
    if p <= 0.0:
        return 1.0 if z <= 0 else 0.0
    if p >= 1.0:
        return 1.0 if n >= z else 0.0
    ks = np.arange(z, n + 1)
    log_tail = logsumexp(binomial_log_pmf(ks, n, p))
    return min(1.0, float(np.exp(log_tail)))


def tail_geq(model: ArrivalModel, z: int, strict: bool = False) -> float:
    """Probability P(N >= z) that the received count reaches a threshold.

    Args:
        model: Arrival model (n, p, mode).
        z: Threshold count.
        strict: In Gaussian mode, raise on zero variance instead of
            returning the deterministic indicator.

    Returns:
        Tail probability in [0, 1].

    Raises:
        DegenerateVarianceError: Gaussian mode, zero variance, strict set.
    """
    z = int(z)
    if z <= 0:
        return 1.0
    n = model.released_count
    if model.mode is ArrivalMode.EXACT_BINOMIAL:
        if z > n:
            return 0.0
        return _exact_tail(n, model.hit_probability, z)

    mean, variance = gaussian_params(model)
    if variance <= 0.0:
        if strict:
            raise DegenerateVarianceError(
                f"Gaussian tail undefined for n={n}, p={model.hit_probability}"
            )
        return 1.0 if mean >= z else 0.0
    return q_function((z - mean) / math.sqrt(variance))


def interval_probability(model: ArrivalModel, low: int, high: int | None) -> float:
    """Probability P(low <= N < high); high=None means no upper cut."""
    upper = 0.0 if high is None else tail_geq(model, high)
    return max(0.0, tail_geq(model, low) - upper)

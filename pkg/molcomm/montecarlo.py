"""Monte Carlo particle oracle.

Samples first-passage times, simulates slot arrival counts and estimates the
empirical symbol error rate of any scheme, independently of the closed forms
in analysis. Trials run in fixed-size chunks, each with its own random
substream, so a report depends only on (seed, stream_id, trials) and never on
the number of workers.
"""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import LinkOperatingPoint, operating_point
from .errors import DomainError
from .modulation import Emission, MoleculeSpec, SchemeConfig, get_modem
from .physics import ChannelGeometry, slot_hit_probability

logger = logging.getLogger(__name__)

CHUNK_TRIALS = 10_000
# first-passage draws held in memory at once
MAX_BLOCK_DRAWS = 2_000_000
WILSON_Z95 = 1.959963984540054

COUNT_PATHS = ("binomial", "first_passage")


@dataclass(frozen=True)
class RngSpec:
    """Seed and substream of a reproducible random source.

    Attributes:
        seed: 64-bit unsigned seed.
        stream_id: Independent substream (one per sweep point and scheme).
    """

    seed: int = 0
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream_id < 0:
            raise ValueError(f"stream_id must be nonnegative, got {self.stream_id}")

    def generator(self, chunk: int = 0) -> np.random.Generator:
        """Generator for one trial chunk of this substream."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, chunk))
        return np.random.default_rng(sequence)


@dataclass(frozen=True)
class TrialReport:
    """Empirical symbol error tally with a Wilson 95% interval."""

    trials: int
    errors: int
    ci_low: float
    ci_high: float
    per_symbol_trials: tuple[int, ...] = ()
    per_symbol_errors: tuple[int, ...] = ()

    @property
    def ser_estimate(self) -> float:
        """errors / trials."""
        return self.errors / self.trials if self.trials else 0.0

    @property
    def ci_95(self) -> tuple[float, float]:
        """Wilson 95% interval bounds."""
        return self.ci_low, self.ci_high

    @property
    def standard_error(self) -> float:
        """Binomial standard error of the estimate."""
        p = self.ser_estimate
        return math.sqrt(p * (1.0 - p) / self.trials) if self.trials else 0.0


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    Args:
        errors: Observed successes of the counted event.
        trials: Number of trials (> 0).
        z: Normal quantile of the confidence level.

    Returns:
        (low, high), ordered and containing errors / trials.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    low = min(max(0.0, center - half), p)
    high = max(min(1.0, center + half), p)
    return low, high


def sample_first_passage(r: float, D: float, rng: np.random.Generator, size=None):
    """Draw first hitting times with density f(t) by inverse transform.

    P(T <= t) = erfc(r / sqrt(4 D t)) = P(|Z| >= r / sqrt(2 D t)) for a
    standard normal Z, hence T = r^2 / (2 D Z^2).

    Args:
        r: Distance to the receiver in meters.
        D: Diffusion coefficient in m^2/s.
        rng: Random generator.
        size: Output shape; None draws a single float.

    Returns:
        First hitting time(s) in seconds, always > 0.
    """
    if not r > 0 or not D > 0:
        raise DomainError(f"r and D must be positive, got r={r}, D={D}")
    z = rng.standard_normal(size)
    with np.errstate(divide="ignore"):
        times = r * r / (2.0 * D * np.square(z))
    if size is None:
        return float(times)
    return times


def _first_passage_counts(
    released: np.ndarray, r: float, D: float, window: tuple[float, float], rng: np.random.Generator
) -> np.ndarray:
    """Per-molecule counts in the window for per-trial release sizes."""
    start, end = window
    counts = np.zeros(released.shape[0], dtype=np.int64)
    n_max = int(released.max(initial=0))
    if n_max == 0:
        return counts
    block = max(1, MAX_BLOCK_DRAWS // n_max)
    slots = np.arange(n_max)
    for first in range(0, released.shape[0], block):
        rows = released[first : first + block]
        times = sample_first_passage(r, D, rng, size=(rows.shape[0], n_max))
        hit = (times > start) & (times <= end) & (slots[None, :] < rows[:, None])
        counts[first : first + block] = hit.sum(axis=1)
    return counts


def _simulate_counts(
    released: np.ndarray,
    geom: ChannelGeometry,
    specs: Sequence[MoleculeSpec],
    rng: np.random.Generator,
    path: str,
    hit_probabilities: Sequence[float] | None,
) -> np.ndarray:
    """(trials, lanes) received counts for a (trials, lanes) release table."""
    if path not in COUNT_PATHS:
        raise ValueError(f"Unknown count path: {path}. Available: {', '.join(COUNT_PATHS)}")
    counts = np.zeros_like(released)
    for lane, spec in enumerate(specs):
        if path == "binomial":
            if hit_probabilities is None:
                p = slot_hit_probability(geom, spec.diffusion_coefficient)
            else:
                p = hit_probabilities[lane]
            counts[:, lane] = rng.binomial(released[:, lane], p)
        else:
            counts[:, lane] = _first_passage_counts(
                released[:, lane], geom.distance, spec.diffusion_coefficient, geom.window, rng
            )
    return counts


def simulate_slot_counts(
    emission: Emission,
    geom: ChannelGeometry,
    specs: Sequence[MoleculeSpec],
    rng: np.random.Generator,
    trials: int,
    path: str = "binomial",
) -> np.ndarray:
    """Received counts of one emission over repeated independent slots.

    The binomial path draws Binomial(n_l, p_l) directly; the first_passage
    path draws every molecule's hitting time and counts the ones landing in
    (tau, tau + T_s). Each molecule is counted at most once.

    Args:
        emission: Molecules released at slot start.
        geom: Channel geometry.
        specs: Molecule types, defining lane order and D per lane.
        rng: Random generator.
        trials: Number of independent slots.
        path: "binomial" or "first_passage".

    Returns:
        (trials, lanes) integer counts, each at most n_l.
    """
    released = np.tile(
        np.array(emission.counts_for([s.type_id for s in specs]), dtype=np.int64), (trials, 1)
    )
    return _simulate_counts(released, geom, specs, rng, path, None)


def _run_chunk(
    cfg: SchemeConfig,
    point: LinkOperatingPoint,
    geom: ChannelGeometry,
    rng_spec: RngSpec,
    chunk: int,
    size: int,
    path: str,
) -> tuple[np.ndarray, np.ndarray]:
    rng = rng_spec.generator(chunk)
    modem = get_modem(cfg)
    order = cfg.order
    symbols = rng.integers(0, order, size=size)
    released = modem.emission_table()[symbols]
    p = [lane.hit_probability for lane in point.lanes]
    counts = _simulate_counts(released, geom, cfg.molecule_specs, rng, path, p)
    counts += np.array([lane.background for lane in point.lanes], dtype=np.int64)
    wrong = modem.decode_batch(counts) != symbols
    sent = np.bincount(symbols, minlength=order)
    errors = np.bincount(symbols[wrong], minlength=order)
    return sent, errors


def empirical_ser(
    cfg: SchemeConfig,
    point: LinkOperatingPoint | None,
    geom: ChannelGeometry,
    rng: RngSpec,
    trials: int,
    path: str = "binomial",
    workers: int = 1,
) -> TrialReport:
    """Estimate the symbol error rate by simulation.

    Draws uniform random symbols, encodes them, simulates the received
    counts, decodes with threshold detection and tallies symbol errors.

    Args:
        cfg: Scheme configuration.
        point: Operating point (p_l and background per lane); built from
            cfg and geom when None.
        geom: Channel geometry.
        rng: Seed and substream.
        trials: Number of simulated symbols (>= 1).
        path: "binomial" (fast) or "first_passage" (per molecule).
        workers: Threads over trial chunks; does not change the result.

    Returns:
        TrialReport with the Wilson 95% interval.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if point is None:
        point = operating_point(cfg, geom)

    sizes = [min(CHUNK_TRIALS, trials - start) for start in range(0, trials, CHUNK_TRIALS)]
    tasks = [(cfg, point, geom, rng, chunk, size, path) for chunk, size in enumerate(sizes)]
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda task: _run_chunk(*task), tasks))
    else:
        results = [_run_chunk(*task) for task in tasks]

    sent = sum(r[0] for r in results)
    errors = sum(r[1] for r in results)
    total_errors = int(errors.sum())
    low, high = wilson_interval(total_errors, trials)
    logger.debug("%s: %d/%d symbol errors", cfg.scheme.value, total_errors, trials)
    return TrialReport(
        trials=trials,
        errors=total_errors,
        ci_low=low,
        ci_high=high,
        per_symbol_trials=tuple(int(v) for v in sent),
        per_symbol_errors=tuple(int(v) for v in errors),
    )


def random_walk_hit_fraction(
    r: float,
    D: float,
    window: tuple[float, float],
    dt: float,
    walkers: int,
    rng: np.random.Generator,
) -> float:
    """Fraction of discrete random walkers first reaching r inside a window.

    Coarse fixed-step Gaussian walk from 0 absorbed at r; a smoke oracle for
    the exact sampler, biased late by O(sqrt(D dt)).

    Args:
        r: Absorbing boundary in meters.
        D: Diffusion coefficient in m^2/s.
        window: (start, end) after release, in seconds.
        dt: Time step in seconds.
        walkers: Number of independent walkers.
        rng: Random generator.

    Returns:
        Fraction of walkers whose first crossing lies in (start, end].
    """
    start, end = window
    steps = int(math.ceil(end / dt))
    sigma = math.sqrt(2.0 * D * dt)
    position = np.zeros(walkers)
    hit_time = np.full(walkers, np.inf)
    alive = np.ones(walkers, dtype=bool)
    for step in range(1, steps + 1):
        position[alive] += sigma * rng.standard_normal(int(alive.sum()))
        crossed = alive & (position >= r)
        hit_time[crossed] = step * dt
        alive &= ~crossed
        if not alive.any():
            break
    return float(np.mean((hit_time > start) & (hit_time <= end)))

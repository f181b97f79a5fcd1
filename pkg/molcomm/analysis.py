"""Closed-form link analysis.

Builds the conditional transition matrix P(received s_j | sent s_i) of each
scheme from the per-lane arrival statistics, then derives symbol error rate,
mutual information and capacity (Blahut-Arimoto) from it.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError
from .modulation import ERASURE_SYMBOL, Scheme, SchemeConfig, get_modem, symbol_to_bits
from .physics import ChannelGeometry, slot_hit_probability
from .stats import (
    GAUSSIAN_MIN_VARIANCE,
    ArrivalMode,
    ArrivalModel,
    gaussian_params,
    interval_probability,
    tail_geq,
)

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9
PRIOR_SUM_TOLERANCE = 1e-12
# probabilities below this are treated as zero in entropy sums
NEGLIGIBLE = 1e-300


@dataclass(frozen=True)
class LaneState:
    """Arrival statistics of one molecule type at the receiver.

    Attributes:
        type_id: Molecule type.
        released: Molecules released when the lane is active, n_l.
        hit_probability: Slot hit probability, p_l.
        threshold: Detection threshold, z_l.
        background: Deterministic background arrivals added to every slot.
    """

    type_id: int
    released: int
    hit_probability: float
    threshold: int
    background: int = 0

    def arrival_model(self, mode: ArrivalMode, released: int | None = None) -> ArrivalModel:
        """Binomial arrival model of this lane for a given release count."""
        n = self.released if released is None else released
        return ArrivalModel(n, self.hit_probability, mode)

    @property
    def u(self) -> float:
        """Normalized threshold U_l = (z_l - n_l p_l) / sqrt(n_l p_l (1 - p_l))."""
        mean, variance = gaussian_params(self.arrival_model(ArrivalMode.GAUSSIAN_APPROX))
        if variance <= 0.0:
            return math.copysign(math.inf, self.threshold - mean)
        return (self.threshold - mean) / math.sqrt(variance)

    @property
    def false_alarm(self) -> float:
        """Probability a silent lane reaches threshold from background alone."""
        return 1.0 if self.background >= self.threshold else 0.0


@dataclass(frozen=True)
class LinkOperatingPoint:
    """Per-lane (n_l, p_l, z_l) operating point of a link."""

    lanes: tuple[LaneState, ...]

    def lane(self, type_id: int) -> LaneState:
        """Lane of a molecule type."""
        for lane in self.lanes:
            if lane.type_id == type_id:
                return lane
        raise KeyError(f"no lane for molecule type {type_id}")

    @property
    def u_values(self) -> tuple[float, ...]:
        """U_l of every lane."""
        return tuple(lane.u for lane in self.lanes)


@dataclass(eq=False)
class TransitionMatrix:
    """Discrete memoryless channel P(receive s_j | send s_i), rows indexed by i."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatchError(f"transition matrix must be square, got {entries.shape}")
        if np.any(entries < -ROW_SUM_TOLERANCE) or np.any(entries > 1.0 + ROW_SUM_TOLERANCE):
            raise ValueError("transition probabilities must lie in [0, 1]")
        entries = np.clip(entries, 0.0, 1.0)
        row_sums = entries.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOLERANCE):
            raise ValueError(f"transition matrix rows must sum to 1, got {row_sums}")
        self.entries = entries

    @property
    def order(self) -> int:
        """Number of symbols M."""
        return self.entries.shape[0]


@dataclass(eq=False)
class PriorDistribution:
    """A priori symbol probabilities q_i."""

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        probabilities = np.asarray(self.probabilities, dtype=np.float64)
        if probabilities.ndim != 1 or np.any(probabilities < 0):
            raise ValueError("priors must be a nonnegative vector")
        if abs(probabilities.sum() - 1.0) > PRIOR_SUM_TOLERANCE:
            raise ValueError(f"priors must sum to 1, got {probabilities.sum()}")
        self.probabilities = probabilities

    @classmethod
    def uniform(cls, order: int) -> "PriorDistribution":
        """Equally probable symbols, q_i = 1 / M."""
        return cls(np.full(order, 1.0 / order))

    @property
    def order(self) -> int:
        """Number of symbols M."""
        return self.probabilities.shape[0]


@dataclass
class CapacityResult:
    """Outcome of the capacity iteration."""

    capacity_bits: float
    optimal_priors: PriorDistribution
    uniform_prior_mi: float
    gap: float
    iterations: int
    converged: bool


@dataclass
class LinkAnalysis:
    """All closed-form outputs for one scheme at one operating point."""

    point: LinkOperatingPoint
    matrix: TransitionMatrix
    ser: float
    capacity: CapacityResult
    warnings: list[str] = field(default_factory=list)


def operating_point(
    cfg: SchemeConfig, geom: ChannelGeometry, background: int = 0
) -> LinkOperatingPoint:
    """Build the per-lane operating point of a scheme over a channel.

    Args:
        cfg: Scheme configuration.
        geom: Channel geometry; p_l comes from each type's D.
        background: Background arrivals per lane and slot.

    Returns:
        Operating point with n_l = the largest release of lane l.
    """
    table = get_modem(cfg).emission_table()
    lanes = []
    for index, spec in enumerate(cfg.molecule_specs):
        lanes.append(
            LaneState(
                type_id=spec.type_id,
                released=int(table[:, index].max()),
                hit_probability=slot_hit_probability(geom, spec.diffusion_coefficient),
                threshold=spec.threshold,
                background=background,
            )
        )
    return LinkOperatingPoint(tuple(lanes))


def gaussian_validity_warnings(point: LinkOperatingPoint, cfg: SchemeConfig) -> list[str]:
    """Warnings for lanes whose arrival variance is too small for the Gaussian tail."""
    messages = []
    table = get_modem(cfg).emission_table()
    for index, lane in enumerate(point.lanes):
        releases = sorted({int(n) for n in table[:, index] if n > 0})
        for n in releases:
            _, variance = gaussian_params(lane.arrival_model(ArrivalMode.GAUSSIAN_APPROX, n))
            if variance < GAUSSIAN_MIN_VARIANCE:
                messages.append(
                    f"Gaussian approximation unreliable (np(1-p) < {GAUSSIAN_MIN_VARIANCE:g}): "
                    f"{cfg.scheme.value} type {lane.type_id}, n={n}, "
                    f"p={lane.hit_probability:.6g}, np(1-p)={variance:.4g}"
                )
    return messages


def _lane_fires(lane: LaneState, released: int, mode: ArrivalMode) -> float:
    if released == 0:
        return lane.false_alarm
    return tail_geq(lane.arrival_model(mode, released), lane.threshold - lane.background)


def bit_success_probability(
    point: LinkOperatingPoint,
    type_id: int,
    mode: ArrivalMode = ArrivalMode.GAUSSIAN_APPROX,
) -> float:
    """Probability that a transmitted 1 on a lane is detected as 1.

    Gaussian mode gives Q(U_l); exact mode gives P(N_l >= z_l).

    Args:
        point: Operating point.
        type_id: Lane (molecule type).
        mode: Tail evaluation mode.

    Returns:
        Detection probability.
    """
    lane = point.lane(type_id)
    return _lane_fires(lane, lane.released, mode)


def transition_matrix_oomosk(
    point: LinkOperatingPoint,
    cfg: SchemeConfig,
    mode: ArrivalMode = ArrivalMode.GAUSSIAN_APPROX,
) -> TransitionMatrix:
    """Transition matrix of OOMoSK.

    Lanes are independent: a 1-lane is detected with its success probability,
    a silent lane reads 0 unless background alone reaches its threshold.
    """
    k = cfg.bits_per_symbol
    order = cfg.order
    on = np.array([bit_success_probability(point, lane.type_id, mode) for lane in point.lanes])
    off = np.array([lane.false_alarm for lane in point.lanes])
    bits = np.array([symbol_to_bits(s, k) for s in range(order)], dtype=bool)

    entries = np.ones((order, order))
    for lane in range(k):
        fire = np.where(bits[:, lane], on[lane], off[lane])[:, None]
        detected = bits[:, lane][None, :]
        entries *= np.where(detected, fire, 1.0 - fire)
    return TransitionMatrix(entries)


def transition_matrix_mosk(
    point: LinkOperatingPoint,
    cfg: SchemeConfig,
    mode: ArrivalMode = ArrivalMode.GAUSSIAN_APPROX,
) -> TransitionMatrix:
    """Transition matrix of MoSK.

    The symbol is decoded when exactly one type reaches threshold; otherwise
    the reception is an erasure mapped to ERASURE_SYMBOL.
    """
    order = cfg.order
    modem = get_modem(cfg)
    table = modem.emission_table()
    entries = np.zeros((order, order))
    for sent in range(order):
        fires = np.array(
            [_lane_fires(lane, int(table[sent, j]), mode) for j, lane in enumerate(point.lanes)]
        )
        silent = 1.0 - fires
        for received in range(order):
            others = np.prod(np.delete(silent, received))
            entries[sent, received] = fires[received] * others
        entries[sent, ERASURE_SYMBOL] += max(0.0, 1.0 - entries[sent].sum())
    return TransitionMatrix(entries)


def transition_matrix_csk(
    point: LinkOperatingPoint,
    cfg: SchemeConfig,
    mode: ArrivalMode = ArrivalMode.GAUSSIAN_APPROX,
) -> TransitionMatrix:
    """Transition matrix of CSK: P(level j | level i) = P(z_j <= N < z_{j+1})."""
    (lane,) = point.lanes
    order = cfg.order
    lows = (0,) + tuple(cfg.csk_thresholds)
    highs = tuple(cfg.csk_thresholds) + (None,)
    bg = lane.background
    entries = np.zeros((order, order))
    for sent, released in enumerate(cfg.csk_levels):
        model = lane.arrival_model(mode, released)
        for received, (low, high) in enumerate(zip(lows, highs)):
            upper = None if high is None else high - bg
            entries[sent, received] = interval_probability(model, low - bg, upper)
    return TransitionMatrix(entries)


_MATRIX_BUILDERS = {
    Scheme.OOMOSK: transition_matrix_oomosk,
    Scheme.MOSK: transition_matrix_mosk,
    Scheme.CSK: transition_matrix_csk,
}


def transition_matrix(
    point: LinkOperatingPoint,
    cfg: SchemeConfig,
    mode: ArrivalMode = ArrivalMode.GAUSSIAN_APPROX,
) -> TransitionMatrix:
    """Transition matrix of any registered scheme."""
    return _MATRIX_BUILDERS[cfg.scheme](point, cfg, mode)


def _check_dimensions(tm: TransitionMatrix, priors: PriorDistribution) -> None:
    if tm.order != priors.order:
        raise DimensionMismatchError(
            f"transition matrix has order {tm.order} but priors have {priors.order}"
        )


def symbol_error_rate(tm: TransitionMatrix, priors: PriorDistribution | None = None) -> float:
    """Prior-weighted symbol error probability P_s = sum_i q_i (1 - P(s_i | s_i)).

    Args:
        tm: Transition matrix.
        priors: Symbol priors; uniform when omitted.

    Returns:
        Symbol error rate.
    """
    priors = priors or PriorDistribution.uniform(tm.order)
    _check_dimensions(tm, priors)
    return float(np.dot(priors.probabilities, 1.0 - np.diag(tm.entries)))


def oomosk_ser_closed_form(q1: float, q2: float, prior: float = 0.25) -> float:
    """4-ary OOMoSK SER from the two lane detection probabilities Q(U_1), Q(U_2)."""
    return prior * (3.0 - q1 - q2 - q1 * q2)


def oomosk_ser_equal_lanes(q: float, prior: float = 0.25) -> float:
    """4-ary OOMoSK SER when both lanes share Q(U)."""
    return prior * (1.0 - q) * (3.0 + q)


def mutual_information(tm: TransitionMatrix, priors: PriorDistribution | None = None) -> float:
    """Mutual information I(X; Y) in bits per symbol.

    Args:
        tm: Transition matrix.
        priors: Input distribution; uniform when omitted.

    Returns:
        I(X; Y) in [0, log2 M].
    """
    priors = priors or PriorDistribution.uniform(tm.order)
    _check_dimensions(tm, priors)
    joint = priors.probabilities[:, None] * tm.entries
    output = joint.sum(axis=0)
    mask = joint > NEGLIGIBLE
    ratio = tm.entries[mask] / np.broadcast_to(output, joint.shape)[mask]
    info = float(np.sum(joint[mask] * np.log2(ratio)))
    return min(max(info, 0.0), math.log2(tm.order))


def _row_divergences(entries: np.ndarray, output: np.ndarray) -> np.ndarray:
    """D(W_i || output) in bits for every input row."""
    mask = entries > NEGLIGIBLE
    safe_output = np.where(output > 0, output, 1.0)
    terms = np.zeros_like(entries)
    terms[mask] = entries[mask] * np.log2(
        entries[mask] / np.broadcast_to(safe_output, entries.shape)[mask]
    )
    return terms.sum(axis=1)


def capacity(
    tm: TransitionMatrix,
    tolerance: float = 1e-9,
    max_iterations: int = 10_000,
) -> CapacityResult:
    """Channel capacity max over priors of I(X; Y), by Blahut-Arimoto iteration.

    Stops once the gap between the upper bound max_i D(W_i || r W) and the
    lower bound log2 sum_i r_i 2^D(W_i || r W) is at most the tolerance.

    Args:
        tm: Transition matrix.
        tolerance: Bound gap in bits.
        max_iterations: Iteration limit.

    Returns:
        CapacityResult; converged is False when the limit was hit first.
    """
    entries = tm.entries
    order = tm.order
    uniform = PriorDistribution.uniform(order)
    r = uniform.probabilities.copy()
    lower = upper = 0.0
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        divergences = _row_divergences(entries, r @ entries)
        peak = float(divergences.max())
        weights = r * np.exp2(divergences - peak)
        lower = peak + math.log2(weights.sum())
        upper = peak
        if upper - lower <= tolerance:
            break
        r = weights / weights.sum()

    gap = max(upper - lower, 0.0)
    converged = gap <= tolerance
    if not converged:
        logger.warning("Capacity iteration stopped at gap %.3g after %d steps", gap, iterations)
    return CapacityResult(
        capacity_bits=min(max(lower, 0.0), math.log2(order)),
        optimal_priors=PriorDistribution(r / r.sum()),
        uniform_prior_mi=mutual_information(tm, uniform),
        gap=gap,
        iterations=iterations,
        converged=converged,
    )


def analyze_link(
    cfg: SchemeConfig,
    geom: ChannelGeometry,
    mode: ArrivalMode = ArrivalMode.GAUSSIAN_APPROX,
    background: int = 0,
) -> LinkAnalysis:
    """Operating point, transition matrix, SER and capacity for one scheme."""
    point = operating_point(cfg, geom, background)
    warnings = []
    if mode is ArrivalMode.GAUSSIAN_APPROX:
        warnings = gaussian_validity_warnings(point, cfg)
        for message in warnings:
            logger.warning(message)
    matrix = transition_matrix(point, cfg, mode)
    return LinkAnalysis(
        point=point,
        matrix=matrix,
        ser=symbol_error_rate(matrix),
        capacity=capacity(matrix),
        warnings=warnings,
    )

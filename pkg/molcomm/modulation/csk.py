"""Concentration Shift Keying (CSK).

A single molecule type; symbol i releases a_i molecules with equally spaced
levels whose uniform-prior mean is k * (molecules per bit). Cut points sit at
the midpoints of adjacent expected received counts.
"""

import math
from collections.abc import Sequence

import numpy as np

from .base import BaseModem, Emission, MoleculeSpec, Scheme, SchemeConfig, lane_coefficients


def csk_levels(bits_per_symbol: int, molecules_per_bit: int) -> tuple[int, ...]:
    """Equally spaced release levels {0, n0, 2 n0, ...} with mean k * molecules_per_bit.

    Args:
        bits_per_symbol: k.
        molecules_per_bit: Per-bit molecule budget.

    Returns:
        M integer levels, first level 0.
    """
    order = 2**bits_per_symbol
    step = 2.0 * bits_per_symbol * molecules_per_bit / (order - 1)
    return tuple(int(math.floor(i * step + 0.5)) for i in range(order))


def csk_midpoint_thresholds(levels: Sequence[int], hit_probability: float) -> tuple[int, ...]:
    """Cut points at midpoints of adjacent expected received counts.

    z_i = round((a_i + a_{i+1}) * p / 2), then lifted so every cut is at least
    1 and strictly above the previous one.

    Args:
        levels: Ascending release levels.
        hit_probability: Slot hit probability p.

    Returns:
        M - 1 strictly ascending integer cut points.
    """
    cuts: list[int] = []
    for low, high in zip(levels, levels[1:]):
        z = int(math.floor((low + high) * hit_probability / 2.0 + 0.5))
        floor = cuts[-1] + 1 if cuts else 1
        cuts.append(max(z, floor))
    return tuple(cuts)


class CSKModem(BaseModem):
    """Amplitude-like keying on the molecule count of one type."""

    scheme = Scheme.CSK

    @classmethod
    def build_config(
        cls,
        bits_per_symbol: int,
        molecules_per_bit: int,
        diffusion_coefficients: Sequence[float] | float,
        threshold: int,
        hit_probability: float | None = None,
    ) -> SchemeConfig:
        """Build a CSK config; cuts follow hit_probability (1.0 when unknown)."""
        if isinstance(diffusion_coefficients, (int, float)):
            coefficient = float(diffusion_coefficients)
        else:
            (coefficient,) = lane_coefficients(list(diffusion_coefficients)[:1], 1)
        levels = csk_levels(bits_per_symbol, molecules_per_bit)
        p = 1.0 if hit_probability is None else hit_probability
        cuts = csk_midpoint_thresholds(levels, p)
        spec = MoleculeSpec(type_id=1, diffusion_coefficient=coefficient, threshold=cuts[0])
        return SchemeConfig(
            scheme=cls.scheme,
            bits_per_symbol=bits_per_symbol,
            molecules_per_one_bit=molecules_per_bit,
            molecule_specs=(spec,),
            csk_levels=levels,
            csk_thresholds=cuts,
        )

    def encode(self, symbol: int) -> Emission:
        self._check_symbol(symbol)
        return Emission({1: self.cfg.csk_levels[int(symbol)]})

    def decode_batch(self, counts: np.ndarray) -> np.ndarray:
        counts = np.atleast_2d(counts)[:, 0]
        cuts = np.asarray(self.cfg.csk_thresholds, dtype=np.int64)
        return np.searchsorted(cuts, counts, side="right").astype(np.int64)

    def describe(self) -> dict:
        info = super().describe()
        info["levels"] = list(self.cfg.csk_levels)
        info["thresholds"] = list(self.cfg.csk_thresholds)
        info["normalization"] = (
            f"equally spaced levels with mean {self.cfg.bits_per_symbol} x "
            f"{self.cfg.molecules_per_one_bit} molecules per symbol; midpoint cuts"
        )
        return info

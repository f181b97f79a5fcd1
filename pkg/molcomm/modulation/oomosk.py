"""On-Off Molecule Shift Keying (OOMoSK).

Each of the k bits of a symbol has its own molecule type. Type l is released
iff bit l is 1, so an all-zero symbol leaves the transmitter off.
"""

from collections.abc import Sequence

import numpy as np

from ..errors import LengthMismatchError
from .base import (
    BaseModem,
    Emission,
    MoleculeSpec,
    Scheme,
    SchemeConfig,
    lane_coefficients,
    symbol_to_bits,
)


class OOMoSKModem(BaseModem):
    """Per-bit on-off keying across k molecule types."""

    scheme = Scheme.OOMOSK

    @classmethod
    def build_config(
        cls,
        bits_per_symbol: int,
        molecules_per_bit: int,
        diffusion_coefficients: Sequence[float] | float,
        threshold: int,
        hit_probability: float | None = None,
    ) -> SchemeConfig:
        """Build an OOMoSK config with k lanes sharing one threshold."""
        coefficients = lane_coefficients(diffusion_coefficients, bits_per_symbol)
        specs = tuple(
            MoleculeSpec(type_id=i + 1, diffusion_coefficient=d, threshold=threshold)
            for i, d in enumerate(coefficients)
        )
        return SchemeConfig(
            scheme=cls.scheme,
            bits_per_symbol=bits_per_symbol,
            molecules_per_one_bit=molecules_per_bit,
            molecule_specs=specs,
        )

    def encode_bits(self, bits: Sequence[int]) -> Emission:
        """Emission for one k-bit chunk; the first bit drives type 1."""
        k = self.cfg.bits_per_symbol
        if len(bits) != k:
            raise LengthMismatchError(f"expected a {k}-bit chunk, got {len(bits)} bits")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"bits must be 0 or 1, got {tuple(bits)}")
        n = self.cfg.molecules_per_one_bit
        return Emission({lane + 1: n for lane, bit in enumerate(bits) if bit == 1})

    def encode(self, symbol: int) -> Emission:
        self._check_symbol(symbol)
        return self.encode_bits(symbol_to_bits(int(symbol), self.cfg.bits_per_symbol))

    def decode_batch(self, counts: np.ndarray) -> np.ndarray:
        counts = np.atleast_2d(counts)
        fired = counts >= self.cfg.thresholds
        k = self.cfg.bits_per_symbol
        weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
        return fired.astype(np.int64) @ weights

    def describe(self) -> dict:
        info = super().describe()
        info["normalization"] = (
            f"{self.cfg.molecules_per_one_bit} molecules of type l per 1-bit on lane l"
        )
        return info

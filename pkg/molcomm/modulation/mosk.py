"""Molecule Shift Keying (MoSK).

Symbol i releases k * (molecules per bit) molecules of type i + 1, so the
per-bit average matches OOMoSK's per-bit budget.
"""

from collections.abc import Sequence

import numpy as np

from .base import BaseModem, Emission, MoleculeSpec, Scheme, SchemeConfig, lane_coefficients

# symbol an ambiguous or silent reception decodes to
ERASURE_SYMBOL = 0


class MoSKModem(BaseModem):
    """One molecule type per symbol, M types for M-ary."""

    scheme = Scheme.MOSK

    @classmethod
    def build_config(
        cls,
        bits_per_symbol: int,
        molecules_per_bit: int,
        diffusion_coefficients: Sequence[float] | float,
        threshold: int,
        hit_probability: float | None = None,
    ) -> SchemeConfig:
        """Build a MoSK config with 2^k types sharing one threshold."""
        coefficients = lane_coefficients(diffusion_coefficients, 2**bits_per_symbol)
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

    @property
    def molecules_per_symbol(self) -> int:
        """n_q = k * molecules per bit."""
        return self.cfg.bits_per_symbol * self.cfg.molecules_per_one_bit

    def encode(self, symbol: int) -> Emission:
        self._check_symbol(symbol)
        return Emission({int(symbol) + 1: self.molecules_per_symbol})

    def decode_batch(self, counts: np.ndarray) -> np.ndarray:
        counts = np.atleast_2d(counts)
        fired = counts >= self.cfg.thresholds
        single = fired.sum(axis=1) == 1
        return np.where(single, np.argmax(fired, axis=1), ERASURE_SYMBOL).astype(np.int64)

    def describe(self) -> dict:
        info = super().describe()
        info["normalization"] = (
            f"{self.molecules_per_symbol} molecules (k x {self.cfg.molecules_per_one_bit}) "
            "of the selected type per symbol"
        )
        info["erasure"] = f"no or multiple types at threshold decode to symbol {ERASURE_SYMBOL}"
        return info

"""Base types and modem class for molecular modulation schemes."""

from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..errors import ConfigError, LengthMismatchError, SymbolRangeError


def _is_integer(value: Any) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


class Scheme(Enum):
    """Supported modulation schemes."""

    OOMOSK = "oomosk"
    MOSK = "mosk"
    CSK = "csk"

    @classmethod
    def parse(cls, value: "str | Scheme") -> "Scheme":
        """Parse a scheme name, case-insensitively."""
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            available = ", ".join(s.value for s in cls)
            raise ConfigError(f"Unknown scheme: {value}. Available: {available}") from None


@dataclass(frozen=True)
class MoleculeSpec:
    """One messenger molecule type.

    Attributes:
        type_id: Molecule type, 1-based.
        diffusion_coefficient: D of this type in m^2/s.
        threshold: Detection threshold z_l in molecules.
    """

    type_id: int
    diffusion_coefficient: float
    threshold: int = 20

    def __post_init__(self) -> None:
        for name in ("type_id", "threshold"):
            if not _is_integer(getattr(self, name)):
                raise ConfigError(f"{name} must be an integer, got {getattr(self, name)!r}")
        if self.type_id < 1:
            raise ConfigError(f"type_id must be >= 1, got {self.type_id}")
        if not self.diffusion_coefficient > 0:
            raise ConfigError(
                f"diffusion_coefficient must be positive, got {self.diffusion_coefficient}"
            )
        if self.threshold < 1:
            raise ConfigError(f"threshold must be >= 1, got {self.threshold}")


@dataclass(frozen=True)
class SchemeConfig:
    """Immutable configuration of one modulation scheme.

    Attributes:
        scheme: Modulation scheme.
        bits_per_symbol: k; the order is M = 2^k.
        molecules_per_one_bit: Molecules released per 1-bit (OOMoSK) and the
            per-bit normalization for MoSK and CSK.
        molecule_specs: Molecule types, sorted by type_id.
        csk_levels: Molecules released per CSK symbol.
        csk_thresholds: Ascending CSK cut points (M - 1 of them).
    """

    scheme: Scheme
    bits_per_symbol: int
    molecules_per_one_bit: int
    molecule_specs: tuple[MoleculeSpec, ...]
    csk_levels: tuple[int, ...] = ()
    csk_thresholds: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for name in ("bits_per_symbol", "molecules_per_one_bit"):
            if not _is_integer(getattr(self, name)):
                raise ConfigError(f"{name} must be an integer, got {getattr(self, name)!r}")
        k = self.bits_per_symbol
        if k < 1:
            raise ConfigError(f"bits_per_symbol must be >= 1, got {k}")
        if self.molecules_per_one_bit < 1:
            raise ConfigError(
                f"molecules_per_one_bit must be >= 1, got {self.molecules_per_one_bit}"
            )
        specs = tuple(sorted(self.molecule_specs, key=lambda s: s.type_id))
        object.__setattr__(self, "molecule_specs", specs)
        ids = [s.type_id for s in specs]
        if ids != list(range(1, len(ids) + 1)):
            raise ConfigError(f"type_ids must be unique and numbered 1..{len(ids)}, got {ids}")

        expected = {Scheme.OOMOSK: k, Scheme.MOSK: 2**k, Scheme.CSK: 1}[self.scheme]
        if len(specs) != expected:
            raise ConfigError(
                f"{self.scheme.value} with k={k} needs {expected} molecule types, got {len(specs)}"
            )
        if self.scheme is Scheme.CSK:
            if len(self.csk_levels) != self.order:
                raise ConfigError(f"csk needs {self.order} levels, got {len(self.csk_levels)}")
            if any(a < 0 for a in self.csk_levels):
                raise ConfigError("csk levels must be nonnegative")
            cuts = self.csk_thresholds
            if len(cuts) != self.order - 1:
                raise ConfigError(f"csk needs {self.order - 1} thresholds, got {len(cuts)}")
            if any(b <= a for a, b in zip(cuts, cuts[1:])) or (cuts and cuts[0] < 1):
                raise ConfigError(f"csk thresholds must be >= 1 and strictly ascending: {cuts}")

    @property
    def order(self) -> int:
        """Modulation order M = 2^k."""
        return 2**self.bits_per_symbol

    @property
    def type_ids(self) -> tuple[int, ...]:
        """Molecule type ids in lane order."""
        return tuple(s.type_id for s in self.molecule_specs)

    @property
    def thresholds(self) -> np.ndarray:
        """Per-type detection thresholds in lane order."""
        return np.array([s.threshold for s in self.molecule_specs], dtype=np.int64)


@dataclass(frozen=True)
class Emission:
    """Molecules released at the start of one slot, per molecule type."""

    per_type_counts: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.per_type_counts.values()):
            raise ValueError("emission counts must be nonnegative")

    @property
    def total(self) -> int:
        """Total molecules released."""
        return sum(self.per_type_counts.values())

    def counts_for(self, type_ids: Sequence[int]) -> tuple[int, ...]:
        """Released counts in the given lane order (absent types are 0)."""
        return tuple(self.per_type_counts.get(t, 0) for t in type_ids)


@dataclass(frozen=True)
class MoleculeBudget:
    """Molecule (energy) accounting over all M symbols."""

    total_over_symbols: int
    per_bit_average: float
    types_required: int
    per_symbol: tuple[int, ...]


def symbol_to_bits(symbol: int, k: int) -> tuple[int, ...]:
    """Bits of a symbol index, first (most significant) bit first."""
    if not 0 <= symbol < 2**k:
        raise SymbolRangeError(f"symbol {symbol} outside 0..{2**k - 1}")
    return tuple((symbol >> (k - 1 - i)) & 1 for i in range(k))


def bits_to_symbol(bits: Sequence[int]) -> int:
    """Symbol index of a bit chunk, first bit most significant."""
    symbol = 0
    for bit in bits:
        if bit not in (0, 1):
            raise ValueError(f"bits must be 0 or 1, got {bit}")
        symbol = (symbol << 1) | int(bit)
    return symbol


@dataclass(frozen=True)
class SymbolStream:
    """Serial bit stream cut into k-bit symbols.

    Streams whose length is not a multiple of k are rejected, never padded.
    """

    bits: tuple[int, ...]
    bits_per_symbol: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bit stream may only contain 0 and 1")
        if len(self.bits) % self.bits_per_symbol:
            raise LengthMismatchError(
                f"stream of {len(self.bits)} bits is not divisible by k={self.bits_per_symbol}"
            )

    @classmethod
    def from_string(cls, text: str, bits_per_symbol: int) -> "SymbolStream":
        """Build a stream from a string such as '11100100'."""
        return cls(tuple(int(c) for c in text if not c.isspace()), bits_per_symbol)

    def chunks(self) -> list[tuple[int, ...]]:
        """k-bit chunks in transmission order."""
        k = self.bits_per_symbol
        return [self.bits[i : i + k] for i in range(0, len(self.bits), k)]

    def symbols(self) -> list[int]:
        """Symbol indices in transmission order."""
        return [bits_to_symbol(chunk) for chunk in self.chunks()]


class BaseModem(ABC):
    """Abstract base class for scheme encoders/decoders."""

    scheme: Scheme

    def __init__(self, cfg: SchemeConfig) -> None:
        """Initialize modem with a scheme configuration.

        Args:
            cfg: Configuration; its scheme must match the modem.
        """
        if cfg.scheme is not self.scheme:
            raise ConfigError(f"{type(self).__name__} cannot run a {cfg.scheme.value} config")
        self.cfg = cfg

    @classmethod
    @abstractmethod
    def build_config(
        cls,
        bits_per_symbol: int,
        molecules_per_bit: int,
        diffusion_coefficients: Sequence[float] | float,
        threshold: int,
        hit_probability: float | None = None,
    ) -> SchemeConfig:
        """Build a scheme configuration with this scheme's normalization."""

    @abstractmethod
    def encode(self, symbol: int) -> Emission:
        """Emission for a symbol index."""

    @abstractmethod
    def decode_batch(self, counts: np.ndarray) -> np.ndarray:
        """Decode received counts.

        Args:
            counts: (trials, lanes) received counts in lane order.

        Returns:
            (trials,) decoded symbol indices.
        """

    def describe(self) -> dict[str, Any]:
        """Normalization details recorded in run metadata."""
        return {"scheme": self.scheme.value, "order": self.cfg.order}

    def _check_symbol(self, symbol: int) -> None:
        if not 0 <= int(symbol) < self.cfg.order:
            raise SymbolRangeError(f"symbol {symbol} outside 0..{self.cfg.order - 1}")

    def emission_table(self) -> np.ndarray:
        """(M, lanes) molecules released per symbol and lane."""
        ids = self.cfg.type_ids
        return np.array(
            [self.encode(s).counts_for(ids) for s in range(self.cfg.order)], dtype=np.int64
        )

    def decode(self, counts: Mapping[int, int]) -> int:
        """Decode one slot's received counts (type_id -> N) to a symbol."""
        if any(c < 0 for c in counts.values()):
            raise ValueError("received counts must be nonnegative")
        row = np.array([[counts.get(t, 0) for t in self.cfg.type_ids]], dtype=np.int64)
        return int(self.decode_batch(row)[0])

    def budget(self) -> MoleculeBudget:
        """Molecules released over all M symbols and types required."""
        per_symbol = tuple(int(v) for v in self.emission_table().sum(axis=1))
        total = sum(per_symbol)
        bits_sent = self.cfg.order * self.cfg.bits_per_symbol
        return MoleculeBudget(
            total_over_symbols=total,
            per_bit_average=total / bits_sent,
            types_required=len(self.cfg.molecule_specs),
            per_symbol=per_symbol,
        )


def lane_coefficients(values: Sequence[float] | float, lanes: int) -> list[float]:
    """Expand a scalar D or validate a per-lane list of D values."""
    if isinstance(values, (int, float)):
        return [float(values)] * lanes
    values = [float(v) for v in values]
    if len(values) != lanes:
        raise ConfigError(f"expected {lanes} diffusion coefficients, got {len(values)}")
    return values

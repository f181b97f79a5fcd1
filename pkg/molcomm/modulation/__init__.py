"""Modulation schemes for molecular communication.

This package provides symbol encoders/decoders and molecule-budget
accounting for the supported schemes.

Available modems:
- OOMoSKModem: per-bit on-off keying across k molecule types
- MoSKModem: one molecule type per symbol (2^k types)
- CSKModem: concentration levels of a single molecule type
"""

from collections.abc import Mapping, Sequence

from ..errors import ConfigError
from .base import (
    BaseModem,
    Emission,
    MoleculeBudget,
    MoleculeSpec,
    Scheme,
    SchemeConfig,
    SymbolStream,
    bits_to_symbol,
    symbol_to_bits,
)
from .csk import CSKModem, csk_levels, csk_midpoint_thresholds
from .mosk import ERASURE_SYMBOL, MoSKModem
from .oomosk import OOMoSKModem

__all__ = [
    # Types
    "BaseModem",
    "Emission",
    "MoleculeBudget",
    "MoleculeSpec",
    "Scheme",
    "SchemeConfig",
    "SymbolStream",
    "bits_to_symbol",
    "symbol_to_bits",
    # Modems
    "OOMoSKModem",
    "MoSKModem",
    "CSKModem",
    "ERASURE_SYMBOL",
    "csk_levels",
    "csk_midpoint_thresholds",
    # Functional API
    "SCHEMES",
    "get_modem",
    "build_config",
    "encode_oomosk",
    "encode_mosk",
    "encode_csk",
    "decode_threshold",
    "decode_bits",
    "molecule_budget",
    "encode_stream",
    "decode_stream",
]


# Scheme registry, in CSV emission order
SCHEMES = {
    Scheme.OOMOSK: {
        "modem": OOMoSKModem,
        "description": "On-off keying per bit across k molecule types",
    },
    Scheme.MOSK: {
        "modem": MoSKModem,
        "description": "One of 2^k molecule types per symbol",
    },
    Scheme.CSK: {
        "modem": CSKModem,
        "description": "Molecule-count levels of a single type",
    },
}


def get_modem(cfg: SchemeConfig) -> BaseModem:
    """Create the modem for a scheme configuration.

    Args:
        cfg: Scheme configuration.

    Returns:
        Initialized modem instance.

    Raises:
        ConfigError: If the scheme is not registered.
    """
    if cfg.scheme not in SCHEMES:
        available = ", ".join(s.value for s in SCHEMES)
        raise ConfigError(f"Unknown scheme: {cfg.scheme}. Available: {available}")
    return SCHEMES[cfg.scheme]["modem"](cfg)


def build_config(
    scheme: Scheme | str,
    bits_per_symbol: int = 2,
    molecules_per_bit: int = 125,
    diffusion_coefficients: Sequence[float] | float = 13.0,
    threshold: int = 20,
    hit_probability: float | None = None,
) -> SchemeConfig:
    """Build a scheme configuration by scheme name.

    Args:
        scheme: Scheme or its name ("oomosk", "mosk", "csk").
        bits_per_symbol: k.
        molecules_per_bit: Per-bit molecule budget.
        diffusion_coefficients: One D for all types or one per type.
        threshold: Detection threshold for OOMoSK/MoSK types.
        hit_probability: Slot hit probability used for CSK midpoint cuts.

    Returns:
        Validated SchemeConfig.
    """
    scheme = Scheme.parse(scheme)
    modem_cls = SCHEMES[scheme]["modem"]
    return modem_cls.build_config(
        bits_per_symbol, molecules_per_bit, diffusion_coefficients, threshold, hit_probability
    )


def _modem_for(cfg: SchemeConfig, scheme: Scheme) -> BaseModem:
    if cfg.scheme is not scheme:
        raise ConfigError(f"expected a {scheme.value} config, got {cfg.scheme.value}")
    return get_modem(cfg)


def encode_oomosk(bits: Sequence[int], cfg: SchemeConfig) -> Emission:
    """Encode one k-bit chunk with OOMoSK."""
    return _modem_for(cfg, Scheme.OOMOSK).encode_bits(bits)


def encode_mosk(symbol_index: int, cfg: SchemeConfig) -> Emission:
    """Encode one symbol with MoSK."""
    return _modem_for(cfg, Scheme.MOSK).encode(symbol_index)


def encode_csk(symbol_index: int, cfg: SchemeConfig) -> Emission:
    """Encode one symbol with CSK."""
    return _modem_for(cfg, Scheme.CSK).encode(symbol_index)


def decode_threshold(counts: Mapping[int, int], cfg: SchemeConfig) -> int:
    """Threshold-detect one slot's received counts (type_id -> N) to a symbol index."""
    return get_modem(cfg).decode(counts)


def decode_bits(counts: Mapping[int, int], cfg: SchemeConfig) -> tuple[int, ...]:
    """Threshold-detect one slot's received counts to its k bits."""
    return symbol_to_bits(decode_threshold(counts, cfg), cfg.bits_per_symbol)


def molecule_budget(cfg: SchemeConfig) -> MoleculeBudget:
    """Molecules released over all M symbols and molecule types required."""
    return get_modem(cfg).budget()


def encode_stream(bits: Sequence[int] | str, cfg: SchemeConfig) -> list[Emission]:
    """Serial-to-parallel: one Emission per k-bit slot.

    Raises:
        LengthMismatchError: If the stream length is not a multiple of k.
    """
    if isinstance(bits, str):
        stream = SymbolStream.from_string(bits, cfg.bits_per_symbol)
    else:
        stream = SymbolStream(tuple(bits), cfg.bits_per_symbol)
    modem = get_modem(cfg)
    return [modem.encode(symbol) for symbol in stream.symbols()]


def decode_stream(slot_counts: Sequence[Mapping[int, int]], cfg: SchemeConfig) -> list[int]:
    """Parallel-to-serial: decode each slot and concatenate the bits."""
    bits: list[int] = []
    for counts in slot_counts:
        bits.extend(decode_bits(counts, cfg))
    return bits

"""Sweep export: CSV table and run-metadata sidecar."""

import json
import os
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from .config import RunConfig, point_inputs
from .modulation import get_modem

CSV_COLUMNS = [
    "scheme",
    "sweep_param",
    "sweep_value",
    "p_hit",
    "ser_analytic",
    "ser_mc",
    "ser_mc_ci_lo",
    "ser_mc_ci_hi",
    "mi_uniform_bits",
    "capacity_bits",
    "capacity_bits_per_s",
]

# 17 significant digits round-trip every double
FLOAT_FORMAT = "%.17g"

RECORDED_DISCREPANCIES = (
    "tau is the detection-window offset after release; the window is (tau, tau + T_s)",
    "capacity_bits_per_s is capacity_bits / T_s and ignores inter-symbol interference",
    "at the default geometry most first arrivals precede tau, so p is small and "
    "SER stays close to its no-detection limit",
)


def rows_to_frame(rows: Sequence[dict]) -> pd.DataFrame:
    """Build the CSV table in column order."""
    return pd.DataFrame(list(rows), columns=CSV_COLUMNS)


def write_sweep_csv(frame: pd.DataFrame, path: Path) -> None:
    """Write the sweep table atomically.

    Missing Monte Carlo values become empty fields. The file is first written
    next to the target and then moved into place; a failed write leaves no
    partial file behind.

    Args:
        frame: Table with CSV_COLUMNS.
        path: Destination CSV path.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        frame.to_csv(
            tmp,
            index=False,
            float_format=FLOAT_FORMAT,
            na_rep="",
            lineterminator="\n",
            encoding="utf-8",
        )
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def read_sweep_csv(path: Path) -> pd.DataFrame:
    """Read a sweep CSV back; empty Monte Carlo fields become NaN."""
    return pd.read_csv(path, float_precision="round_trip")


def metadata_path(csv_path: Path) -> Path:
    """Sidecar path for a CSV: <output>.meta.txt."""
    return csv_path.with_name(csv_path.name + ".meta.txt")


def _normalization_notes(config: RunConfig) -> list[str]:
    notes = []
    value = config.sweep.start
    for scheme in config.scheme_list:
        cfg, _ = point_inputs(config, scheme, value)
        info = get_modem(cfg).describe()
        notes.append(f"{scheme.value}: {info['normalization']}")
    return notes


def write_metadata(config: RunConfig, csv_path: Path, version: str) -> Path:
    """Write the human-readable key: value run record next to the CSV.

    Args:
        config: Run configuration used for the sweep.
        csv_path: Path of the CSV the record describes.
        version: Tool version.

    Returns:
        Path of the written sidecar.
    """
    path = metadata_path(csv_path)
    lines = [
        f"tool: molcomm {version}",
        f"csv: {csv_path.name}",
        f"seed: {config.seed}",
        f"mode: {config.mode}",
        f"count_path: {config.path}",
        f"trials: {config.trials}",
        f"sweep: {config.sweep.parameter} {config.sweep.spacing} "
        f"{config.sweep.start:g} -> {config.sweep.stop:g} in {config.sweep.steps} steps",
        f"config: {json.dumps(config.to_dict(), sort_keys=True)}",
    ]
    lines += [f"normalization: {note}" for note in _normalization_notes(config)]
    lines += [f"note: {note}" for note in RECORDED_DISCREPANCIES]
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    return path

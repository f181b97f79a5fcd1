"""Parameter sweeps over the closed-form and Monte Carlo link models.

Each (scheme, sweep value) pair is one independent point: the closed-form
analysis gives p, SER, mutual information and capacity, and the optional
Monte Carlo oracle adds an empirical SER with its Wilson interval. Points may
run in a process pool; rows are always emitted scheme-major in sweep order.
"""

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from tqdm import tqdm

from . import __version__
from .analysis import analyze_link
from .config import RunConfig, point_inputs, point_warning, resolve_output_path, validate
from .errors import ConfigError, ConvergenceError
from .export import rows_to_frame, write_metadata, write_sweep_csv
from .modulation import SCHEMES, Scheme
from .montecarlo import RngSpec, empirical_ser

logger = logging.getLogger(__name__)

# substreams reserved per sweep point, one per registered scheme
STREAMS_PER_POINT = 8


@dataclass
class SweepRow:
    """One CSV row plus the convergence status of its capacity."""

    scheme: str
    sweep_param: str
    sweep_value: float
    p_hit: float
    ser_analytic: float
    ser_mc: float | None
    ser_mc_ci_lo: float | None
    ser_mc_ci_hi: float | None
    mi_uniform_bits: float
    capacity_bits: float
    capacity_bits_per_s: float
    converged: bool = True
    gap: float = 0.0
    iterations: int = 0
    warnings: list[str] = field(default_factory=list)


@dataclass
class SweepResult:
    """Rows of a finished sweep and the files written for it."""

    rows: list[SweepRow]
    csv_path: Path | None = None
    metadata_path: Path | None = None
    warnings: list[str] = field(default_factory=list)


def stream_id(point_index: int, scheme: Scheme) -> int:
    """Random substream of one (sweep point, scheme) pair."""
    return point_index * STREAMS_PER_POINT + list(SCHEMES).index(scheme)


def evaluate_point(
    config: RunConfig, scheme: Scheme | str, value: float, point_index: int
) -> SweepRow:
    """Evaluate one scheme at one sweep value.

    Args:
        config: Validated run configuration.
        scheme: Scheme to evaluate.
        value: Value of the swept parameter.
        point_index: Position of value in the sweep grid (selects the substream).

    Returns:
        SweepRow; Monte Carlo fields are None when trials is 0.
    """
    scheme = Scheme.parse(scheme)
    cfg, geom = point_inputs(config, scheme, value)
    analysis = analyze_link(cfg, geom, config.arrival_mode, config.background)
    result = analysis.capacity

    ser_mc = ci_lo = ci_hi = None
    if config.trials > 0:
        report = empirical_ser(
            cfg,
            analysis.point,
            geom,
            RngSpec(config.seed, stream_id(point_index, scheme)),
            config.trials,
            path=config.path,
        )
        ser_mc = report.ser_estimate
        ci_lo, ci_hi = report.ci_95

    return SweepRow(
        scheme=scheme.value,
        sweep_param=config.sweep.parameter,
        sweep_value=float(value),
        p_hit=analysis.point.lanes[0].hit_probability,
        ser_analytic=analysis.ser,
        ser_mc=ser_mc,
        ser_mc_ci_lo=ci_lo,
        ser_mc_ci_hi=ci_hi,
        mi_uniform_bits=result.uniform_prior_mi,
        capacity_bits=result.capacity_bits,
        capacity_bits_per_s=result.capacity_bits / config.T_s,
        converged=result.converged,
        gap=result.gap,
        iterations=result.iterations,
        warnings=analysis.warnings,
    )


def _evaluate_task(task: tuple) -> SweepRow:
    return evaluate_point(*task)


def evaluate_sweep(config: RunConfig, progress: bool = False) -> list[SweepRow]:
    """Evaluate every (scheme, value) pair of a sweep in emission order.

    Args:
        config: Validated run configuration.
        progress: Show a progress bar on stderr.

    Returns:
        Rows ordered scheme-major, then by sweep value.
    """
    values = config.sweep.values()
    tasks = [
        (config, scheme.value, value, index)
        for scheme in config.scheme_list
        for index, value in enumerate(values)
    ]
    bar = tqdm(total=len(tasks), disable=not progress, file=sys.stderr, desc="sweep")
    try:
        if config.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                rows = []
                for row in pool.map(_evaluate_task, tasks):
                    rows.append(row)
                    bar.update()
        else:
            rows = []
            for task in tasks:
                rows.append(_evaluate_task(task))
                bar.update()
    finally:
        bar.close()
    logger.info("Evaluated %d sweep points", len(rows))
    return rows


def run_sweep(
    config: RunConfig, output: Path | None = None, progress: bool = False
) -> SweepResult:
    """Run a sweep and write its CSV and metadata sidecar.

    Args:
        config: Run configuration.
        output: CSV path; defaults to the config's output resolved against
            MOLCOMM_OUTPUT_DIR.
        progress: Show a progress bar on stderr.

    Returns:
        SweepResult with rows and written paths.

    Raises:
        ConfigError: If validation reports any error.
        ConvergenceError: If a capacity iteration failed to converge; no
            output file is left behind.
    """
    diagnostics = validate(config)
    errors = [d for d in diagnostics if d.is_error]
    if errors:
        raise ConfigError("; ".join(d.message for d in errors), diagnostics)
    warnings = [d.message for d in diagnostics]

    csv_path = Path(output) if output is not None else resolve_output_path(config.output)
    rows = evaluate_sweep(config, progress)

    failed = [row for row in rows if not row.converged]
    if failed:
        worst = max(failed, key=lambda row: row.gap)
        raise ConvergenceError(
            f"capacity did not converge at {len(failed)} point(s); worst: "
            f"{worst.scheme} {worst.sweep_param}={worst.sweep_value:g} gap={worst.gap:.3g}",
            gap=worst.gap,
            iterations=worst.iterations,
        )

    seen = set(warnings)
    for row in rows:
        for message in row.warnings:
            text = point_warning(message, row.sweep_param, row.sweep_value)
            if text not in seen:
                seen.add(text)
                warnings.append(text)

    write_sweep_csv(rows_to_frame([asdict(row) for row in rows]), csv_path)
    try:
        meta = write_metadata(config, csv_path, __version__)
    except BaseException:
        csv_path.unlink(missing_ok=True)
        raise
    logger.info("Wrote %d rows to %s", len(rows), csv_path)
    return SweepResult(rows=rows, csv_path=csv_path, metadata_path=meta, warnings=warnings)
